#include "csc/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "csc/geometry.hpp"
#include "csc/hungarian.hpp"

namespace csc {

namespace {

// frame -> (id -> box)
using FrameMap = std::map<int, std::map<int, BoundingBox>>;

FrameMap index_by_frame(const TrackSet& set, const char* what) {
  FrameMap out;
  for (const TrackRecord& r : set.records) {
    auto [it, inserted] = out[r.frame].emplace(r.id, r.box);
    (void)it;
    if (!inserted)
      throw std::invalid_argument(std::string(what) + ": duplicate id " + std::to_string(r.id) +
                                  " in frame " + std::to_string(r.frame));
  }
  return out;
}

}  // namespace

EvalReport evaluate(const TrackSet& predictions, const TrackSet& gt, double iou_threshold) {
  const FrameMap pred_frames = index_by_frame(predictions, "predictions");
  const FrameMap gt_frames = index_by_frame(gt, "gt");

  EvalReport rep;
  rep.gt_count = static_cast<int>(gt.records.size());
  rep.pred_count = static_cast<int>(predictions.records.size());

  std::set<int> frames;
  for (const auto& [f, m] : pred_frames) frames.insert(f);
  for (const auto& [f, m] : gt_frames) frames.insert(f);

  std::map<int, int> last_match;  // gt id -> pred id from the most recent matched frame

  for (int f : frames) {
    static const std::map<int, BoundingBox> kEmpty;
    const auto& gm = gt_frames.count(f) ? gt_frames.at(f) : kEmpty;
    const auto& pm = pred_frames.count(f) ? pred_frames.at(f) : kEmpty;

    std::vector<int> gt_ids, pred_ids;
    for (const auto& [id, b] : gm) gt_ids.push_back(id);
    for (const auto& [id, b] : pm) pred_ids.push_back(id);

    std::vector<bool> gt_done(gt_ids.size(), false), pred_done(pred_ids.size(), false);
    std::map<int, int> frame_match;  // gt id -> pred id

    // CLEAR persistence: an existing correspondence survives while it
    // still clears the IoU threshold, before any fresh matching.
    for (size_t gi = 0; gi < gt_ids.size(); ++gi) {
      auto prev = last_match.find(gt_ids[gi]);
      if (prev == last_match.end()) continue;
      auto pit = std::find(pred_ids.begin(), pred_ids.end(), prev->second);
      if (pit == pred_ids.end()) continue;
      const size_t pi = static_cast<size_t>(pit - pred_ids.begin());
      if (pred_done[pi]) continue;
      if (iou(gm.at(gt_ids[gi]), pm.at(pred_ids[pi])) >= iou_threshold) {
        frame_match[gt_ids[gi]] = pred_ids[pi];
        gt_done[gi] = true;
        pred_done[pi] = true;
      }
    }

    std::vector<int> free_gt, free_pred;
    for (size_t gi = 0; gi < gt_ids.size(); ++gi)
      if (!gt_done[gi]) free_gt.push_back(gt_ids[gi]);
    for (size_t pi = 0; pi < pred_ids.size(); ++pi)
      if (!pred_done[pi]) free_pred.push_back(pred_ids[pi]);

    if (!free_gt.empty() && !free_pred.empty()) {
      Eigen::MatrixXd cost(static_cast<Eigen::Index>(free_gt.size()),
                           static_cast<Eigen::Index>(free_pred.size()));
      for (size_t i = 0; i < free_gt.size(); ++i)
        for (size_t j = 0; j < free_pred.size(); ++j)
          cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              -iou(gm.at(free_gt[i]), pm.at(free_pred[j]));
      for (const auto& [i, j] : hungarian(cost)) {
        if (-cost(i, j) < iou_threshold) continue;
        frame_match[free_gt[static_cast<size_t>(i)]] = free_pred[static_cast<size_t>(j)];
      }
    }

    for (const auto& [gid, pid] : frame_match) {
      ++rep.matches;
      auto prev = last_match.find(gid);
      if (prev != last_match.end() && prev->second != pid) ++rep.id_switches;
      last_match[gid] = pid;
    }
    rep.fn += static_cast<int>(gm.size() - frame_match.size());
    rep.fp += static_cast<int>(pm.size() - frame_match.size());
  }

  rep.mota = rep.gt_count > 0
                 ? 1.0 - static_cast<double>(rep.fp + rep.fn + rep.id_switches) / rep.gt_count
                 : 1.0;

  // IDF1: globally match gt trajectories to prediction trajectories,
  // maximising the number of frames where the pair overlaps at threshold.
  std::map<int, int> gt_len, pred_len;
  for (const TrackRecord& r : gt.records) ++gt_len[r.id];
  for (const TrackRecord& r : predictions.records) ++pred_len[r.id];

  std::map<std::pair<int, int>, int> overlap;
  for (const auto& [f, gm] : gt_frames) {
    auto pf = pred_frames.find(f);
    if (pf == pred_frames.end()) continue;
    for (const auto& [gid, gb] : gm)
      for (const auto& [pid, pb] : pf->second)
        if (iou(gb, pb) >= iou_threshold) ++overlap[{gid, pid}];
  }

  std::vector<int> gids, pids;
  for (const auto& [id, n] : gt_len) gids.push_back(id);
  for (const auto& [id, n] : pred_len) pids.push_back(id);

  int idtp = 0;
  if (!gids.empty() && !pids.empty()) {
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(gids.size()),
                         static_cast<Eigen::Index>(pids.size()));
    for (size_t i = 0; i < gids.size(); ++i)
      for (size_t j = 0; j < pids.size(); ++j) {
        auto it = overlap.find({gids[i], pids[j]});
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            it == overlap.end() ? 0.0 : -static_cast<double>(it->second);
      }
    for (const auto& [i, j] : hungarian(cost)) idtp += static_cast<int>(-cost(i, j));
  }
  const int total = rep.gt_count + rep.pred_count;
  rep.idf1 = total > 0 ? 2.0 * idtp / total : 1.0;

  return rep;
}

std::string report_table(const EvalReport& r) {
  std::ostringstream os;
  os << "metric        value\n";
  os << "------------  ---------\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "MOTA          %9.4f\n", r.mota);
  os << buf;
  std::snprintf(buf, sizeof(buf), "IDF1          %9.4f\n", r.idf1);
  os << buf;
  os << "ID switches   " << r.id_switches << "\n";
  os << "FP            " << r.fp << "\n";
  os << "FN            " << r.fn << "\n";
  os << "GT boxes      " << r.gt_count << "\n";
  os << "pred boxes    " << r.pred_count << "\n";
  return os.str();
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "mota,idf1,id_switches,fp,fn,gt,pred\n";
  os << format_double(r.mota) << ',' << format_double(r.idf1) << ',' << r.id_switches << ','
     << r.fp << ',' << r.fn << ',' << r.gt_count << ',' << r.pred_count << '\n';
  return os.str();
}

}  // namespace csc
