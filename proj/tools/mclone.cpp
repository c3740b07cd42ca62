// Copyright 2026 The mclone Authors
//
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

// mclone: fidelities, the dimension table, the verification report and
// trajectory sampling of the cloning circuit.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mclone/mclone.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MCLONE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "ignoring non-numeric MCLONE_SEED\n";
    }
  }
  return 7;
}

int cmd_fidelity(const std::string& task, std::size_t d, bool json) {
  double closed = 0.0;
  double optimized = 0.0;
  std::string method;
  if (task == "clone") {
    closed = mclone::cloning_fidelity_closed(d);
    optimized = mclone::cloning_extremal_search(d).fidelity.total();
    method = "extremal-search";
  } else if (task == "learn") {
    closed = mclone::learning_fidelity_closed(d);
    const mclone::OptimizationResult r = mclone::optimal_learning_blocks(d);
    optimized = mclone::reduced_fidelity(mclone::learning_blocks(d, *r.maximizer)).total();
    method = "grid-refinement";
  } else {
    closed = mclone::estimate_prepare_fidelity(d);
    optimized = closed;
    method = "closed-form-only";
  }
  if (json) {
    nlohmann::json j{{"task", task},
                     {"d", d},
                     {"closed_form", mclone::number_json(closed)},
                     {"optimized", mclone::number_json(optimized)},
                     {"method", method}};
    std::cout << j.dump() << '\n';
  } else {
    std::cout << mclone::format_number(closed) << '\n'
              << "closed_form " << mclone::format_number(closed) << '\n'
              << "optimized " << mclone::format_number(optimized) << " (" << method << ")\n";
  }
  return kExitOk;
}

int cmd_table(std::size_t d_max, const std::string& format) {
  const auto rows = mclone::figure_table(d_max);
  if (format == "csv") mclone::write_figure_csv(std::cout, rows);
  else mclone::write_figure_json(std::cout, rows);
  return kExitOk;
}

int cmd_verify(const std::vector<std::size_t>& dims, double tol, std::uint64_t seed, std::size_t samples,
               bool fault) {
  mclone::VerifyOptions opt;
  opt.dims = dims;
  opt.tol = tol;
  opt.seed = seed;
  opt.mc_samples = samples;
  opt.inject_delta_fault = fault;
  const mclone::VerificationReport rep = mclone::run_verification(opt);
  rep.write_json_lines(std::cout);
  std::cerr << "checks " << rep.entries.size() << ": PASS " << rep.count(mclone::Status::Pass) << ", WARN "
            << rep.count(mclone::Status::Warn) << ", FAIL " << rep.count(mclone::Status::Fail) << '\n';
  return rep.has_failure() ? kExitFail : kExitOk;
}

int cmd_simulate(std::size_t d, std::uint64_t seed, std::uint64_t shots, const std::string& source,
                 const std::string& state, std::size_t index) {
  mclone::Matrix u = mclone::Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  if (source == "haar") {
    mclone::Rng rng = mclone::derive_stream(seed, 0xfeedULL);
    u = mclone::haar_sample(d, rng);
  }
  const mclone::Signature ab{{"A", d}, {"B", d}};
  mclone::Matrix rho;
  if (state == "mixed") {
    rho = mclone::Matrix::Identity(static_cast<Eigen::Index>(d * d), static_cast<Eigen::Index>(d * d)) /
          static_cast<double>(d * d);
  } else {
    if (index >= d) throw CLI::ValidationError("--index", "must be below --dim");
    const mclone::Vector phi = u.col(static_cast<Eigen::Index>(index));
    rho = mclone::detail::kron(mclone::outer(phi, phi), mclone::outer(phi, phi));
  }
  const mclone::SimulationResult r = mclone::simulate_run(d, u, mclone::Operator(ab, rho), shots, seed);
  std::cout << "i,j,count,frequency,born\n";
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const std::uint64_t c = r.counts[i * d + j];
      std::cout << i << ',' << j << ',' << c << ','
                << mclone::format_number(static_cast<double>(c) / static_cast<double>(shots)) << ','
                << mclone::format_number(r.born[i * d + j]) << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal 1->2 cloning and learning of von Neumann measurements"};
  app.require_subcommand(1);

  std::string task;
  std::size_t dim = 2;
  bool json = false;
  auto* fid = app.add_subcommand("fidelity", "Closed-form and optimized fidelity");
  fid->add_option("--task", task, "clone, learn or estimate")
      ->required()
      ->check(CLI::IsMember({"clone", "learn", "estimate"}));
  fid->add_option("--dim,-d", dim, "Dimension d >= 2")->required()->check(CLI::Range(2, 64));
  fid->add_flag("--json", json, "Emit JSON");

  std::size_t d_max = 10;
  std::string format = "csv";
  auto* table = app.add_subcommand("table", "Fidelity against dimension");
  table->add_option("--dmax", d_max, "Largest dimension")->check(CLI::Range(2, 1000));
  table->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::size_t> dims{2, 3};
  double tol = 1e-9;
  std::uint64_t seed = default_seed();
  std::size_t samples = 2000;
  bool fault = false;
  auto* verify = app.add_subcommand("verify", "Full verification report as JSON lines");
  verify->add_option("--dims", dims, "Comma-separated dimensions in 2..8")
      ->delimiter(',')
      ->check(CLI::Range(2, 8));
  verify->add_option("--tol", tol, "Numerical tolerance")->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "Master seed (default: MCLONE_SEED or 7)");
  verify->add_option("--mc-samples", samples, "Haar samples per Monte-Carlo check");
  verify->add_flag("--inject-delta-fault", fault, "Perturb one Delta-table entry (fault-injection self test)");

  std::uint64_t shots = 100000;
  std::string source = "identity";
  std::string state = "mixed";
  std::size_t index = 0;
  std::size_t sim_dim = 2;
  std::uint64_t sim_seed = default_seed();
  auto* sim = app.add_subcommand("simulate", "Sample the cloning circuit");
  sim->add_option("--dim,-d", sim_dim, "Dimension d >= 2")->check(CLI::Range(2, 8));
  sim->add_option("--seed", sim_seed, "Master seed (default: MCLONE_SEED or 7)");
  sim->add_option("--shots", shots, "Number of runs")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  sim->add_option("--unitary", source, "identity or haar")->check(CLI::IsMember({"identity", "haar"}));
  sim->add_option("--state", state, "mixed or eigen (|u_i>|u_i> on A B)")->check(CLI::IsMember({"mixed", "eigen"}));
  sim->add_option("--index", index, "Eigenstate index for --state eigen");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fid->parsed()) return cmd_fidelity(task, dim, json);
    if (table->parsed()) return cmd_table(d_max, format);
    if (verify->parsed()) return cmd_verify(dims, tol, seed, samples, fault);
    if (sim->parsed()) return cmd_simulate(sim_dim, sim_seed, shots, source, state, index);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
