#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csc/ablation.hpp"
#include "csc/checkpoint.hpp"
#include "csc/config.hpp"
#include "csc/metrics.hpp"
#include "csc/tracker.hpp"
#include "csc/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const fs::path& dir, const std::string& command, const csc::ConfigMap& cfg,
                    std::uint64_t seed, const std::string& checkpoint,
                    const std::string& output) {
  json j;
  j["command"] = command;
  j["config"] = cfg;
  j["seed"] = seed;
  j["checkpoint"] = checkpoint;
  j["output"] = output;
  j["timestamp"] = iso_timestamp();
  fs::create_directories(dir);
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << j.dump(2) << '\n';
}

csc::ConfigMap load_config_opt(const std::string& path) {
  if (path.empty()) return {};
  return csc::read_config_file(path);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

csc::Dataset load_dataset(const std::vector<std::string>& dirs) {
  csc::Dataset data;
  for (const std::string& d : dirs) data.push_back(csc::read_sequence(d));
  if (data.empty()) throw std::runtime_error("no sequence directories given");
  return data;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csctrack: hierarchical-appearance multi-object tracker"};
  app.require_subcommand(1);

  std::string config_path, out_path, preset, checkpoint_path, seq_dir, axis = "levels";
  std::string result_path, gt_path, noise_config_path;
  std::vector<std::string> data_dirs;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double beta = -1.0;
  int window = -1, steps = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value config file");
    cmd->add_option("--out", out_path, "output path")->required();
    cmd->add_option("--seed", seed, "seed override")->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic sequence directory");
  add_common(synth);
  synth->add_option("--preset", preset, "easy | hard scenario preset");

  CLI::App* train = app.add_subcommand("train", "train a model on sequence directories");
  add_common(train);
  train->add_option("--data", data_dirs, "sequence directories")->required()->expected(-1);
  train->add_option("--steps", steps, "override train.steps");

  CLI::App* track = app.add_subcommand("track", "run the tracker over a sequence");
  add_common(track);
  track->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  track->add_option("--seq", seq_dir, "sequence directory")->required();
  track->add_option("--beta", beta, "association threshold override");
  track->add_option("--window", window, "history window override");
  track->add_option("--noise-config", noise_config_path, "noise.* config for detection perturbation");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a result file against ground truth");
  eval->add_option("--result", result_path, "MOT result file")->required();
  eval->add_option("--gt", gt_path, "gt.txt file or sequence directory")->required();
  eval->add_option("--out", out_path, "also write the CSV report here");

  CLI::App* ablate = app.add_subcommand("ablate", "train/evaluate ablation variants");
  add_common(ablate);
  ablate->add_option("--axis", axis, "levels | fusion | train_len | infer_len | noise");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      csc::ConfigMap cfg = load_config_opt(config_path);
      csc::check_known_sections(cfg, {"scenario"});
      csc::ScenarioConfig sc;
      if (!preset.empty()) {
        if (preset == "easy") sc = csc::easy_preset(sc.seed);
        else if (preset == "hard") sc = csc::hard_preset(sc.seed);
        else throw csc::ParseError("unknown preset '" + preset + "'");
      }
      csc::apply_scenario_config(cfg, sc);
      if (seed_set) sc.seed = seed;
      const csc::Sequence seq = csc::generate_sequence(sc);
      csc::write_sequence(seq, out_path);
      write_manifest(out_path, "synth", cfg, sc.seed, "", out_path);
    } else if (*train) {
      csc::ConfigMap cfg = load_config_opt(config_path);
      csc::check_known_sections(cfg, {"model", "train"});
      csc::ModelConfig mc;
      csc::TrainConfig tc;
      csc::apply_model_config(cfg, mc);
      csc::apply_train_config(cfg, tc);
      if (seed_set) tc.seed = seed;
      if (steps >= 0) tc.steps = steps;
      const csc::Dataset data = load_dataset(data_dirs);

      fs::create_directories(out_path);
      std::ofstream log(fs::path(out_path) / "loss_log.csv", std::ios::binary);
      csc::ModelParams params = csc::ModelParams::init(mc, tc.seed);
      const csc::LossReport final_loss = csc::run_training(data, params, tc, &log);
      const std::string ckpt = (fs::path(out_path) / "checkpoint.json").string();
      csc::save_checkpoint(params, ckpt);
      write_manifest(out_path, "train", cfg, tc.seed, ckpt, out_path);
      std::cout << "final assoc=" << final_loss.assoc << " feat=" << final_loss.feat
                << " total=" << final_loss.total << "\n";
    } else if (*track) {
      csc::ConfigMap cfg = load_config_opt(config_path);
      csc::check_known_sections(cfg, {"tracker", "noise"});
      const csc::ModelParams params = csc::load_checkpoint(checkpoint_path);
      csc::TrackerConfig tk;
      tk.horizon = std::min(tk.horizon, params.cfg.horizon_infer);
      tk.window = std::min(tk.window, params.cfg.horizon_infer);
      csc::apply_tracker_config(cfg, tk);
      if (seed_set) tk.seed = seed;
      if (beta >= 0.0) tk.beta = beta;
      if (window > 0) {
        tk.window = window;
        tk.horizon = window;
      }

      const csc::Sequence seq = csc::read_sequence(seq_dir);
      std::vector<std::vector<csc::Detection>> noisy;
      const std::vector<std::vector<csc::Detection>>* dets = nullptr;
      if (!noise_config_path.empty()) {
        csc::ConfigMap ncfg = csc::read_config_file(noise_config_path);
        csc::check_known_sections(ncfg, {"noise"});
        csc::NoiseConfig noise;
        csc::apply_noise_config(ncfg, noise);
        csc::Rng rng(tk.seed ^ 0x9e3779b97f4a7c15ull);
        for (const auto& fd : seq.det)
          noisy.push_back(csc::inject_noise(fd, noise, rng, seq.width, seq.height));
        dets = &noisy;
      }
      const csc::TrackSet result = csc::track_sequence(seq, params, tk, dets);
      csc::write_mot(result, out_path);
      write_manifest(fs::path(out_path).parent_path().empty()
                         ? fs::path(".")
                         : fs::path(out_path).parent_path(),
                     "track", cfg, tk.seed, checkpoint_path, out_path);
    } else if (*eval) {
      const csc::TrackSet pred = csc::read_mot_results(result_path);
      std::string gt_file = gt_path;
      if (fs::is_directory(gt_file)) gt_file = (fs::path(gt_file) / "gt" / "gt.txt").string();
      csc::TrackSet gt;
      for (const csc::Detection& d : csc::read_mot(gt_file, csc::MotKind::ground_truth))
        gt.records.push_back({d.frame, d.identity, d.box, 1.0});
      const csc::EvalReport rep = csc::evaluate(pred, gt);
      std::cout << csc::report_table(rep);
      if (!out_path.empty()) write_text(out_path, csc::report_csv(rep));
    } else if (*ablate) {
      csc::ConfigMap cfg = load_config_opt(config_path);
      csc::check_known_sections(cfg, {"scenario", "model", "train", "tracker", "noise"});
      csc::AblationOptions opts;
      opts.scenario = csc::hard_preset(1);
      csc::apply_scenario_config(cfg, opts.scenario);
      csc::apply_model_config(cfg, opts.model);
      csc::apply_train_config(cfg, opts.train);
      csc::apply_tracker_config(cfg, opts.tracker);
      csc::apply_noise_config(cfg, opts.noise);
      if (seed_set) opts.seeds = {seed, seed + 1, seed + 2};
      const csc::AblationTable table = csc::run_ablation(axis, opts, &std::cerr);
      std::cout << csc::format_table(table);
      fs::create_directories(out_path);
      write_text(fs::path(out_path) / ("ablation_" + axis + ".txt"), csc::format_table(table));
      write_text(fs::path(out_path) / ("ablation_" + axis + ".csv"), csc::table_csv(table));
      write_manifest(out_path, "ablate", cfg, opts.seeds.front(), "", out_path);
    }
  } catch (const csc::ParseError& e) {
    std::cerr << "error: parse: " << e.what() << "\n";
    return 3;
  } catch (const csc::ShapeError& e) {
    std::cerr << "error: shape: " << e.what() << "\n";
    return 4;
  } catch (const csc::DegenerateInputError& e) {
    std::cerr << "error: degenerate: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
