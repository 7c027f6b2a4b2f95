// dauto/tools/dauto.cpp

// Copyright 2026  DAuto Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point. Resolution order for every setting:
// built-in defaults, then the DAUTO_OUTDIR environment variable (outdir
// only), then the --config file, then command-line flags. Flags win.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "dauto/eval.hpp"
#include "dauto/experiment.hpp"

namespace {

void print_report(const dauto::RunReport& report, const std::string& run_type) {
  std::cout << "task=" << report.task << " seed=" << report.seed << " version="
            << report.version << '\n';
  if (run_type == "sweep") {
    for (const dauto::SweepRow& row : report.sweep_rows) {
      std::cout << "  " << row.method << " fraction=" << dauto::format_sig(row.fraction)
                << " test_accuracy=" << dauto::format_sig(row.test_accuracy) << '\n';
    }
  } else if (run_type == "matrix") {
    for (const auto& [method, m] : report.matrices) {
      std::cout << "  " << method << ":\n";
      for (std::size_t i = 0; i < m.rows(); ++i) {
        std::cout << "    " << report.digits[i];
        for (std::size_t j = 0; j < m.cols(); ++j) {
          std::cout << ' ' << dauto::format_sig(m(i, j));
        }
        std::cout << '\n';
      }
    }
  } else {
    for (const dauto::MethodResult& mr : report.methods) {
      if (mr.ok) {
        std::cout << "  " << dauto::mode_name(mr.method)
                  << " lambda=" << dauto::format_sig(mr.best_lambda)
                  << " mu=" << dauto::format_sig(mr.best_mu)
                  << " dev=" << dauto::format_sig(mr.dev_accuracy)
                  << " test=" << dauto::format_sig(mr.test_accuracy)
                  << " proxy_a_before=" << dauto::format_sig(mr.proxy_a_before)
                  << " proxy_a_after=" << dauto::format_sig(mr.proxy_a_after) << '\n';
      } else {
        std::cout << "  " << dauto::mode_name(mr.method) << " FAILED: " << mr.error
                  << '\n';
      }
    }
  }
  for (const std::string& f : report.failures) std::cerr << "failure: " << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dauto: adversarial + reconstruction domain adaptation lab"};
  app.set_version_flag("--version", std::string("dauto ") + dauto::kVersion);

  std::string run_type = "experiment";
  app.add_option("run", run_type, "Run type")
      ->check(CLI::IsMember({"experiment", "sweep", "matrix"}))
      ->capture_default_str();

  std::string config_path, task, modes, lambda_csv, mu_csv, fractions_csv;
  std::string outdir, source, target;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--task", task, "task name (output subdirectory)");
  app.add_option("--mode", modes, "comma list from no_adapt,ae_only,dann,dauto");
  app.add_option("--lambda-grid", lambda_csv, "comma list of reconstruction weights");
  app.add_option("--mu-grid", mu_csv, "comma list of adversarial weights");
  app.add_option("--fractions", fractions_csv, "comma list of label fractions in (0,1]");
  app.add_option("--seed", seed, "root RNG seed");
  app.add_option("--jobs", jobs, "max concurrent grid cells");
  app.add_option("--outdir", outdir, "output directory");
  app.add_option("--source", source, "source domain display name");
  app.add_option("--target", target, "target domain display name");

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::pair<std::string, std::string>> entries;
    if (const char* env = std::getenv("DAUTO_OUTDIR")) entries.emplace_back("outdir", env);
    if (!config_path.empty()) {
      for (auto& kv : dauto::read_config_file(config_path)) entries.push_back(std::move(kv));
    }
    if (app.count("--task")) entries.emplace_back("task", task);
    if (app.count("--mode")) entries.emplace_back("methods", modes);
    if (app.count("--lambda-grid")) entries.emplace_back("lambda_grid", lambda_csv);
    if (app.count("--mu-grid")) entries.emplace_back("mu_grid", mu_csv);
    if (app.count("--fractions")) entries.emplace_back("fractions", fractions_csv);
    if (app.count("--seed")) entries.emplace_back("seed", std::to_string(seed));
    if (app.count("--jobs")) entries.emplace_back("jobs", std::to_string(jobs));
    if (app.count("--outdir")) entries.emplace_back("outdir", outdir);
    if (app.count("--source")) entries.emplace_back("source", source);
    if (app.count("--target")) entries.emplace_back("target", target);

    const dauto::ExperimentConfig cfg = dauto::parse_experiment_config(entries);
    dauto::RunReport report;
    if (run_type == "sweep") report = dauto::run_fraction_sweep(cfg);
    else if (run_type == "matrix") report = dauto::run_digit_matrix(cfg);
    else report = dauto::run_experiment(cfg);

    print_report(report, run_type);
    return report.ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "dauto: " << e.what() << '\n';
    return 2;
  }
}
