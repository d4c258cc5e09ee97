#include "csc/mot_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace csc {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& s, const std::string& path, int line_no) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": bad numeric field '" + s + "'");
  }
}

}  // namespace

std::vector<Detection> read_mot(const std::string& path, MotKind kind) {
  std::ifstream f(path);
  if (!f) throw ParseError("read_mot: cannot open " + path);
  std::vector<Detection> out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 6)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected >= 6 fields");
    Detection d;
    d.frame = static_cast<int>(parse_num(fields[0], path, line_no)) - 1;
    const int id = static_cast<int>(parse_num(fields[1], path, line_no));
    d.identity = (kind == MotKind::ground_truth) ? id : -1;
    d.box.x = parse_num(fields[2], path, line_no);
    d.box.y = parse_num(fields[3], path, line_no);
    d.box.w = parse_num(fields[4], path, line_no);
    d.box.h = parse_num(fields[5], path, line_no);
    d.confidence = fields.size() > 6 ? parse_num(fields[6], path, line_no) : 1.0;
    if (d.frame < 0) throw ParseError(path + ":" + std::to_string(line_no) + ": frame < 1");
    out.push_back(d);
  }
  return out;
}

void write_mot(const TrackSet& tracks, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_mot: cannot open " + path);
  for (const TrackRecord& r : tracks.records) {
    f << (r.frame + 1) << ',' << r.id << ',' << format_double(r.box.x) << ','
      << format_double(r.box.y) << ',' << format_double(r.box.w) << ','
      << format_double(r.box.h) << ',' << format_double(r.confidence) << ",-1,-1,-1\n";
  }
  if (!f) throw std::runtime_error("write_mot: write failed on " + path);
}

TrackSet read_mot_results(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("read_mot_results: cannot open " + path);
  TrackSet out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 7)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected >= 7 fields");
    TrackRecord r;
    r.frame = static_cast<int>(parse_num(fields[0], path, line_no)) - 1;
    r.id = static_cast<int>(parse_num(fields[1], path, line_no));
    r.box.x = parse_num(fields[2], path, line_no);
    r.box.y = parse_num(fields[3], path, line_no);
    r.box.w = parse_num(fields[4], path, line_no);
    r.box.h = parse_num(fields[5], path, line_no);
    r.confidence = parse_num(fields[6], path, line_no);
    out.records.push_back(r);
  }
  return out;
}

}  // namespace csc
