#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "csc/mot_io.hpp"

using namespace csc;

namespace {

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("write_mot/read_mot_results round trip is bit exact") {
  TrackSet set;
  set.records.push_back({0, 1, {10.123456789012345, 20.5, 30.25, 40.75}, 1.0});
  set.records.push_back({1, 2, {0.1 + 0.2, 7.0, 8.0, 9.0}, 0.875});  // 0.30000000000000004
  set.records.push_back({1, 1, {1e-7, 2e17, 3.0, 4.0}, 1.0});

  const std::string path = temp_file("csc_mot_roundtrip.txt");
  write_mot(set, path);
  const TrackSet back = read_mot_results(path);
  REQUIRE(back.records.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back.records[i].frame == set.records[i].frame);
    CHECK(back.records[i].id == set.records[i].id);
    CHECK(back.records[i].box.x == set.records[i].box.x);  // exact
    CHECK(back.records[i].box.y == set.records[i].box.y);
    CHECK(back.records[i].box.w == set.records[i].box.w);
    CHECK(back.records[i].box.h == set.records[i].box.h);
    CHECK(back.records[i].confidence == set.records[i].confidence);
  }

  // writing the parsed set again yields identical bytes
  const std::string path2 = temp_file("csc_mot_roundtrip2.txt");
  write_mot(back, path2);
  CHECK(slurp(path) == slurp(path2));
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("disk format is 1-based, memory 0-based") {
  TrackSet set;
  set.records.push_back({0, 1, {1, 2, 3, 4}, 1.0});
  const std::string path = temp_file("csc_mot_based.txt");
  write_mot(set, path);
  const std::string text = slurp(path);
  CHECK(text.substr(0, 4) == "1,1,");
  const TrackSet back = read_mot_results(path);
  CHECK(back.records[0].frame == 0);
  std::filesystem::remove(path);
}

TEST_CASE("read_mot parses detections and ground truth") {
  const std::string path = temp_file("csc_mot_read.txt");
  {
    std::ofstream out(path);
    out << "1,-1,10,20,30,40,0.9,-1,-1,-1\n";
    out << "2,-1,11,21,31,41,0.8,-1,-1,-1\n";
  }
  const auto dets = read_mot(path, MotKind::detections);
  REQUIRE(dets.size() == 2);
  CHECK(dets[0].frame == 0);
  CHECK(dets[0].identity == -1);
  CHECK(dets[0].confidence == 0.9);
  CHECK(dets[1].box.x == 11.0);
  std::filesystem::remove(path);

  const std::string gt_path = temp_file("csc_mot_gt.txt");
  {
    std::ofstream out(gt_path);
    out << "1,5,10,20,30,40,1,-1,-1\n";
  }
  const auto gt = read_mot(gt_path, MotKind::ground_truth);
  REQUIRE(gt.size() == 1);
  CHECK(gt[0].identity == 5);
  std::filesystem::remove(gt_path);
}

TEST_CASE("malformed rows raise ParseError with location info") {
  const std::string path = temp_file("csc_mot_bad.txt");
  {
    std::ofstream out(path);
    out << "1,-1,10,20,30,40,0.9,-1,-1,-1\n";
    out << "not,a,number,x,y,z,w\n";
  }
  try {
    read_mot(path, MotKind::detections);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(path) != std::string::npos);
    CHECK(msg.find('2') != std::string::npos);  // line number
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_mot("/nonexistent/gt.txt", MotKind::detections), ParseError);
}

TEST_CASE("format_double writes shortest round-trip decimal") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
}
