#include "csc/ablation.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "csc/tracker.hpp"
#include "csc/training.hpp"

namespace csc {

TrackSet gt_track_set(const Sequence& seq) {
  TrackSet out;
  for (size_t f = 0; f < seq.gt.size(); ++f)
    for (const Detection& d : seq.gt[f])
      out.records.push_back({static_cast<int>(f), d.identity, d.box, 1.0});
  return out;
}

EvalReport eval_tracking(const Dataset& data, const ModelParams& params,
                         const TrackerConfig& tracker, const NoiseConfig* noise) {
  EvalReport report;
  double idf1 = 0.0, mota = 0.0;
  for (const Sequence& seq : data) {
    std::vector<std::vector<Detection>> noisy;
    const std::vector<std::vector<Detection>>* dets = nullptr;
    if (noise) {
      Rng rng(tracker.seed ^ 0x9e3779b97f4a7c15ull);
      noisy.reserve(seq.det.size());
      for (const auto& frame_dets : seq.det)
        noisy.push_back(inject_noise(frame_dets, *noise, rng, seq.width, seq.height));
      dets = &noisy;
    }
    const TrackSet result = track_sequence(seq, params, tracker, dets);
    const EvalReport r = evaluate(result, gt_track_set(seq));
    idf1 += r.idf1;
    mota += r.mota;
    report.id_switches += r.id_switches;
    report.fp += r.fp;
    report.fn += r.fn;
    report.gt_count += r.gt_count;
    report.pred_count += r.pred_count;
    report.matches += r.matches;
  }
  if (!data.empty()) {
    report.idf1 = idf1 / static_cast<double>(data.size());
    report.mota = mota / static_cast<double>(data.size());
  }
  return report;
}

ExperimentResult train_track_eval(const Dataset& data, const ModelConfig& model,
                                  const TrainConfig& train, const TrackerConfig& tracker,
                                  const NoiseConfig* noise, std::ostream* log) {
  ModelParams params = ModelParams::init(model, train.seed);
  ExperimentResult res;
  res.final_loss = run_training(data, params, train, log);
  res.report = eval_tracking(data, params, tracker, noise);
  return res;
}

namespace {

struct Variant {
  std::string label;
  ModelConfig model;
  TrainConfig train;
  TrackerConfig tracker;
};

AblationRow average_over_seeds(const Variant& v, const AblationOptions& opts, std::ostream* log) {
  AblationRow row;
  row.label = v.label;
  for (std::uint64_t seed : opts.seeds) {
    ScenarioConfig sc = opts.scenario;
    sc.seed = seed;
    sc.texture_seed = seed * 31;
    const Dataset data{generate_sequence(sc)};
    TrainConfig tr = v.train;
    tr.seed = seed;
    TrackerConfig tk = v.tracker;
    tk.seed = seed;
    const ExperimentResult res = train_track_eval(data, v.model, tr, tk, nullptr, nullptr);
    row.idf1 += res.report.idf1;
    row.mota += res.report.mota;
    row.id_switches += res.report.id_switches;
    if (log)
      *log << v.label << " seed=" << seed << " idf1=" << res.report.idf1
           << " mota=" << res.report.mota << " idsw=" << res.report.id_switches << "\n";
  }
  const double n = static_cast<double>(opts.seeds.size());
  row.idf1 /= n;
  row.mota /= n;
  row.id_switches /= n;
  return row;
}

Variant base_variant(const AblationOptions& opts, const std::string& label) {
  return Variant{label, opts.model, opts.train, opts.tracker};
}

}  // namespace

AblationTable run_ablation(const std::string& axis, const AblationOptions& opts,
                           std::ostream* log) {
  std::vector<Variant> variants;
  if (axis == "levels") {
    for (FusionVariant fv : {FusionVariant::semantic_only, FusionVariant::semantic_compositional,
                             FusionVariant::semantic_contextual, FusionVariant::full}) {
      Variant v = base_variant(opts, to_string(fv));
      v.model.variant = fv;
      variants.push_back(v);
    }
  } else if (axis == "fusion") {
    for (FusionVariant fv : {FusionVariant::multiregion_concat, FusionVariant::full}) {
      Variant v = base_variant(opts, to_string(fv));
      v.model.variant = fv;
      variants.push_back(v);
    }
  } else if (axis == "train_len") {
    for (int t : {4, 8}) {
      Variant v = base_variant(opts, "clip_len=" + std::to_string(t));
      v.train.clip_len = t;
      v.model.horizon_train = t;
      variants.push_back(v);
    }
  } else if (axis == "infer_len") {
    for (int w : {8, 16, 24}) {
      Variant v = base_variant(opts, "window=" + std::to_string(w));
      v.tracker.window = w;
      v.tracker.horizon = std::min(opts.tracker.horizon, w);
      variants.push_back(v);
    }
  } else if (axis == "noise") {
    // One training per (variant, seed); the clean and noisy rows share it.
    AblationTable table;
    table.axis = axis;
    for (FusionVariant fv : {FusionVariant::semantic_only, FusionVariant::full}) {
      AblationRow clean, noisy;
      clean.label = to_string(fv) + "/clean";
      noisy.label = to_string(fv) + "/noisy";
      for (std::uint64_t seed : opts.seeds) {
        ScenarioConfig sc = opts.scenario;
        sc.seed = seed;
        sc.texture_seed = seed * 31;
        const Dataset data{generate_sequence(sc)};
        ModelConfig mc = opts.model;
        mc.variant = fv;
        TrainConfig tr = opts.train;
        tr.seed = seed;
        TrackerConfig tk = opts.tracker;
        tk.seed = seed;
        ModelParams params = ModelParams::init(mc, tr.seed);
        run_training(data, params, tr, nullptr);
        const EvalReport rc = eval_tracking(data, params, tk, nullptr);
        const EvalReport rn = eval_tracking(data, params, tk, &opts.noise);
        clean.idf1 += rc.idf1;
        clean.mota += rc.mota;
        clean.id_switches += rc.id_switches;
        noisy.idf1 += rn.idf1;
        noisy.mota += rn.mota;
        noisy.id_switches += rn.id_switches;
        if (log)
          *log << to_string(fv) << " seed=" << seed << " clean_idf1=" << rc.idf1
               << " noisy_idf1=" << rn.idf1 << "\n";
      }
      const double n = static_cast<double>(opts.seeds.size());
      clean.idf1 /= n;
      clean.mota /= n;
      clean.id_switches /= n;
      noisy.idf1 /= n;
      noisy.mota /= n;
      noisy.id_switches /= n;
      table.rows.push_back(clean);
      table.rows.push_back(noisy);
    }
    return table;
  } else {
    throw std::invalid_argument("ablate: unknown axis '" + axis +
                                "' (expected levels|fusion|train_len|infer_len|noise)");
  }

  AblationTable table;
  table.axis = axis;
  for (const Variant& v : variants) table.rows.push_back(average_over_seeds(v, opts, log));
  return table;
}

std::string format_table(const AblationTable& table) {
  std::ostringstream os;
  os << "axis: " << table.axis << "\n";
  os << "variant                        idf1     mota     idsw\n";
  os << "-----------------------------  -------  -------  -----\n";
  for (const AblationRow& r : table.rows) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-29s  %7.4f  %7.4f  %5.1f\n", r.label.c_str(), r.idf1,
                  r.mota, r.id_switches);
    os << buf;
  }
  return os.str();
}

std::string table_csv(const AblationTable& table) {
  std::ostringstream os;
  os << "axis,variant,idf1,mota,id_switches\n";
  for (const AblationRow& r : table.rows)
    os << table.axis << ',' << r.label << ',' << format_double(r.idf1) << ','
       << format_double(r.mota) << ',' << format_double(r.id_switches) << '\n';
  return os.str();
}

}  // namespace csc
