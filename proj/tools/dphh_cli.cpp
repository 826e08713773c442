// Command-line driver: stream ingestion or synthesis, one-shot and continual
// private heavy-hitter runs, brute-force oracle answers, and multi-trial
// experiments. Exit codes: 0 success, 2 configuration error, 3 input error.

#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "dphh/harness.hpp"
#include "dphh/stream.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;

struct CliOptions {
  std::string mode;
  dphh::RunConfig run;
  std::string cs_estimator = "median";
  std::string continual_scale = "derived";
};

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw std::invalid_argument("cannot open output '" + path + "'");
  return file;
}

int run(CliOptions& opt) {
  dphh::RunConfig& cfg = opt.run;
  cfg.mode = dphh::parse_mode(opt.mode);

  if (opt.cs_estimator == "median") {
    cfg.privacy.cs_estimator = dphh::CsEstimator::kMedianSigned;
  } else if (opt.cs_estimator == "mean-abs") {
    cfg.privacy.cs_estimator = dphh::CsEstimator::kMeanAbsolute;
  } else {
    throw std::invalid_argument("cs-estimator must be median or mean-abs");
  }
  if (opt.continual_scale == "derived") {
    cfg.privacy.continual_scale = dphh::ContinualNoiseScale::kDerived;
  } else if (opt.continual_scale == "box16") {
    cfg.privacy.continual_scale = dphh::ContinualNoiseScale::kBoxSixteen;
  } else if (opt.continual_scale == "boxsqrt") {
    cfg.privacy.continual_scale = dphh::ContinualNoiseScale::kBoxSqrtAlpha;
  } else {
    throw std::invalid_argument("continual-scale must be derived, box16 or boxsqrt");
  }
  cfg.validate();

  std::ofstream file;
  std::ostream& out = open_output(cfg.output_path, file);

  switch (cfg.mode) {
    case dphh::RunMode::kGenerate: {
      dphh::GeneratorSpec spec = dphh::GeneratorSpec::parse(cfg.generator);
      spec.length = cfg.privacy.stream_bound;
      spec.universe = cfg.privacy.universe;
      spec.seed = cfg.privacy.seed;
      auto stream = dphh::generate_stream(spec);
      if (cfg.format == "binary") {
        dphh::write_binary_stream(out, stream);
      } else {
        dphh::write_text_stream(out, stream);
      }
      break;
    }
    case dphh::RunMode::kOracle:
      out << dphh::run_oracle(cfg).dump(2) << '\n';
      break;
    case dphh::RunMode::kContinual:
      if (cfg.trials >= 1) {
        out << dphh::run_experiment(cfg).dump(2) << '\n';
      } else {
        dphh::run_continual(cfg, out);
      }
      break;
    case dphh::RunMode::kOneshotL2:
    case dphh::RunMode::kOneshotL1: {
      if (cfg.trials >= 1) {
        out << dphh::run_experiment(cfg).dump(2) << '\n';
      } else {
        auto doc = dphh::run_oneshot(cfg);
        for (const auto& w : doc["stats"]["warnings"]) {
          std::cerr << "warning: " << w.get<std::string>() << '\n';
        }
        out << doc.dump(2) << '\n';
      }
      break;
    }
  }
  out.flush();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Differentially private heavy hitters over sliding windows:\n"
      "one-shot L2/L1 release, continual release, and exact oracle runs."};
  app.get_formatter()->column_width(34);

  CliOptions opt;
  dphh::PrivacyConfig& p = opt.run.privacy;

  app.set_config("--config", "", "key=value file; command-line flags override it");
  app.add_option("--mode", opt.mode,
                 "oneshot-l2 | oneshot-l1 | continual | oracle | generate")
      ->required();
  app.add_option("--alpha", p.alpha, "heavy-hitter threshold in (0,1)");
  app.add_option("--epsilon", p.epsilon, "privacy budget");
  app.add_option("--delta", p.delta, "approximation slack");
  app.add_option("--window", p.window, "sliding window length W");
  app.add_option("--universe", p.universe, "universe size n");
  app.add_option("--stream-length", p.stream_bound,
                 "stream length bound m (and generator length)");
  app.add_option("--kappa", p.kappa, "calibration scale on structural constants");
  app.add_option("--kappa-w", p.kappa_w, "exact-window fallback scale (0 disables)");
  app.add_flag("--noise,!--no-noise", p.noise, "draw Laplace noise (default on)");
  app.add_option("--seed", p.seed, "master seed");
  app.add_option("--input", opt.run.input_path, "stream file, '-' for stdin");
  app.add_option("--generator", opt.run.generator,
                 "uniform | zipf:<s> | planted:<item>:<mass> | all-distinct");
  app.add_option("--output", opt.run.output_path, "output path (default stdout)");
  app.add_option("--trials", opt.run.trials,
                 "run a seeded experiment with this many trials");
  app.add_option("--norm", opt.run.norm_p, "oracle mode norm, 1 or 2");
  app.add_option("--failure-exponent", opt.run.failure_exponent,
                 "c in the 1 - 1/m^c experiment target");
  app.add_option("--format", opt.run.format, "generate mode output: text | binary");
  app.add_flag("--emit-timing", opt.run.emit_timing,
               "include wall time in documents (breaks byte-identical reruns)");
  app.add_option("--ams-rows", p.ams_rows, "AMS rows override (0 = derive)");
  app.add_option("--ams-reps", p.ams_reps, "AMS median repetitions");
  app.add_option("--cs-rows", p.cs_rows, "CountSketch rows per table");
  app.add_option("--cs-bucket-cap", p.cs_bucket_cap, "CountSketch bucket cap");
  app.add_option("--spawn-every", p.spawn_every, "histogram instance cadence");
  app.add_option("--prune-every", p.prune_every, "histogram prune cadence");
  app.add_option("--cs-estimator", opt.cs_estimator, "median | mean-abs");
  app.add_flag("--l1-box-noise", p.l1_box_noise,
               "use the literal 1/(eps alpha log m) L1 noise scale");
  app.add_option("--continual-scale", opt.continual_scale,
                 "derived | box16 | boxsqrt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    return run(opt);
  } catch (const dphh::StreamIoError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
