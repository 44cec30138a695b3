// affdrift: command-line driver for the arousal drift pipeline.
//
//   affdrift <ingest|features|select|fit|eval|drift|synth|report>
//            [--config cfg.json] [--seed N] [--out DIR] [--sessions DIR]
//
// Precedence: flags > AFFDRIFT_* environment > config file > defaults.
// AFFDRIFT_CONFIG names a config file when --config is absent.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "affdrift/csv.hpp"
#include "affdrift/error.hpp"
#include "affdrift/pipeline.hpp"

namespace {

using affdrift::Error;
using affdrift::ErrorKind;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse:
    case ErrorKind::kValidation: return 2;
    case ErrorKind::kMissingInput: return 3;
    case ErrorKind::kEmptyDataset: return 4;
    case ErrorKind::kPrecondition: return 5;
  }
  return 1;
}

const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kValidation: return "config_or_validation";
    case ErrorKind::kMissingInput: return "missing_input";
    case ErrorKind::kEmptyDataset: return "empty_dataset";
    case ErrorKind::kPrecondition: return "precondition";
  }
  return "internal";
}

int report_error(const std::string& command, const char* kind, const std::string& message, int code) {
  nlohmann::ordered_json j{{"error", {{"command", command}, {"kind", kind}, {"message", message}, {"exit_code", code}}}};
  std::cerr << j.dump() << "\n";
  return code;
}

nlohmann::json read_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(affdrift::csv::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Longitudinal arousal estimation and temporal drift analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string sessions_dir;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "Global seed (u64)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--sessions", sessions_dir, "Sessions root directory");

  auto* ingest = app.add_subcommand("ingest", "Validate sessions and write inventory.json");
  auto* features = app.add_subcommand("features", "Extract the feature table");
  auto* select = app.add_subcommand("select", "Sequential forward feature selection");
  auto* fit = app.add_subcommand("fit", "Fit the ensemble and a full model for one participant");
  std::string participant;
  fit->add_option("--participant", participant, "Participant id")->required();
  auto* eval = app.add_subcommand("eval", "Cross-period train/test cases");
  auto* drift = app.add_subcommand("drift", "Shape drift analysis");
  auto* synth = app.add_subcommand("synth", "Generate synthetic data");
  std::string spec_path;
  std::string preset;
  auto* spec_opt = synth->add_option("--spec", spec_path, "Synth spec JSON file");
  synth->add_option("--preset", preset, "Feature-level truth preset")->excludes(spec_opt);
  auto* report = app.add_subcommand("report", "Write report.md");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("", "usage", e.what(), 2);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("AFFDRIFT_CONFIG"); env && *env) config_path = env;
    }
    affdrift::PipelineConfig config;
    if (!config_path.empty()) config = affdrift::pipeline_config_from_json(read_json_file(config_path));
    affdrift::apply_env_overrides(config, [](const char* name) { return std::getenv(name); });
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (!sessions_dir.empty()) config.sessions_dir = sessions_dir;
    config.validate();

    const affdrift::WarningSink warn = [&](const std::string& msg) {
      std::cerr << "warning: " << msg << "\n";
    };

    if (*ingest) {
      std::cout << affdrift::cmd_ingest(config, warn) << " sessions\n";
    } else if (*features) {
      std::cout << affdrift::cmd_features(config, warn) << " feature rows\n";
    } else if (*select) {
      affdrift::cmd_select(config, warn);
    } else if (*fit) {
      affdrift::cmd_fit(config, participant, warn);
    } else if (*eval) {
      affdrift::cmd_eval(config, warn);
    } else if (*drift) {
      affdrift::cmd_drift(config, warn);
    } else if (*synth) {
      nlohmann::json spec = nlohmann::json::object();
      if (!spec_path.empty()) {
        spec = read_json_file(spec_path);
      } else {
        spec["kind"] = "features";
        spec["preset"] = preset.empty() ? "null" : preset;
      }
      affdrift::cmd_synth(config, spec, warn);
    } else if (*report) {
      affdrift::cmd_report(config, warn);
    }
  } catch (const Error& e) {
    return report_error(command, kind_name(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report_error(command, "internal", e.what(), 1);
  }
  return 0;
}
