// cvm: numerical checks of entropy power and volume inequalities for
// convex measures.
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "cvm/cli.hpp"

namespace {

void add_common(CLI::App* app, cvm::RunConfig& c) {
  app->add_option("--samples", c.samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "Root seed");
  app->add_option("--workers", c.workers, "Worker threads (CVM_WORKERS overrides)")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy power and volume inequality checks for convex measures"};
  app.require_subcommand(1);
  cvm::RunConfig c;

  auto* verify = app.add_subcommand("verify", "Run the check suite and write a report");
  add_common(verify, c);
  std::string suite = "all";
  verify->add_option("--suite", suite, "all, or a comma list of check families");
  verify->add_option("--dim", c.dims, "Dimensions")->delimiter(',');
  verify->add_option("--inner", c.inner, "Inner sample count of the smoothed estimator")->check(CLI::PositiveNumber);
  verify->add_option("--beta0", c.beta0, "beta_0 for convex-measure constants");
  verify->add_option("--betas", c.betas, "Pareto betas for the heavy-tail sweep")->delimiter(',');
  verify->add_option("--out", c.out, "Report path (stdout when omitted)");
  verify->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  verify->add_option("--instances", c.instances, "Instance file replacing the default suite")->check(CLI::ExistingFile);

  auto* entropy = app.add_subcommand("entropy", "Differential entropy of a density or of a sum");
  add_common(entropy, c);
  entropy->add_option("--family", c.family, "uniform, gaussian, exponential, pareto, power_simplex");
  entropy->add_option("--sum", c.sum, "Two families whose independent sum is measured")->delimiter(',');
  entropy->add_option("--density", c.density_file, "Density literal JSON file")->check(CLI::ExistingFile);
  entropy->add_option("--dim", c.dims, "Dimension");
  entropy->add_option("--method", c.method, "auto, analytic, plugin, knn");
  entropy->add_option("--beta", c.beta, "Pareto beta");
  entropy->add_option("--rate", c.rate, "Exponential rate");
  entropy->add_option("--p", c.p, "Power-simplex exponent");
  entropy->add_flag("--facet", c.facet, "Power-simplex weight anchored at a facet");
  entropy->add_option("--inner", c.inner, "Inner sample count for --sum")->check(CLI::PositiveNumber);
  entropy->add_option("--k", c.k, "Neighbour index for knn")->check(CLI::PositiveNumber);

  auto* volume = app.add_subcommand("volume", "Volume of a body");
  add_common(volume, c);
  volume->add_option("--body", c.body, "cube, ccube, ball, simplex, ellipsoid");
  volume->add_option("--body-json", c.body_file, "Body literal JSON file")->check(CLI::ExistingFile);
  volume->add_option("--dim", c.dims, "Dimension");
  volume->add_option("--r", c.r, "Radius or scale");
  volume->add_option("--aspect", c.aspect, "Ellipsoid stretch of the first axis");
  volume->add_flag("--mc", c.monte_carlo, "Force hit-or-miss estimation");

  auto* mpos = app.add_subcommand("mposition", "Search a volume-preserving map maximizing |u(A) cap D|");
  mpos->add_option("--seed", c.seed, "Root seed");
  mpos->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  mpos->add_option("--body", c.body, "cube, ccube, ball, simplex, ellipsoid");
  mpos->add_option("--body-json", c.body_file, "Body literal JSON file")->check(CLI::ExistingFile);
  mpos->add_option("--dim", c.dims, "Dimension");
  mpos->add_option("--r", c.r, "Radius or scale");
  mpos->add_option("--aspect", c.aspect, "Ellipsoid stretch of the first axis");
  mpos->add_option("--budget", c.budget, "Objective evaluations")->check(CLI::PositiveNumber);
  mpos->add_option("--samples", c.samples_per_eval, "Samples per evaluation")->check(CLI::PositiveNumber);

  auto* demo = app.add_subcommand("demo-counterexample", "Pareto sweep of min(H(X+Y), H(X-Y))/H(X)");
  add_common(demo, c);
  demo->add_option("--betas", c.betas, "Pareto betas")->delimiter(',');
  demo->add_option("--inner", c.inner, "Inner sample count")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) {
      c.command = "verify";
      if (suite != "all") {
        std::stringstream list(suite);
        for (std::string item; std::getline(list, item, ',');) c.checks.push_back(item);
      }
      return cvm::cmd_verify(c, std::cout, std::cerr);
    }
    if (entropy->parsed()) {
      c.command = "entropy";
      if (entropy->count("--dim") == 0) c.dims = {1};
      if (c.family.empty() && c.sum.empty() && c.density_file.empty()) c.family = "gaussian";
      return cvm::cmd_entropy(c, std::cout);
    }
    if (volume->parsed()) {
      c.command = "volume";
      if (volume->count("--dim") == 0) c.dims = {2};
      return cvm::cmd_volume(c, std::cout);
    }
    if (mpos->parsed()) {
      c.command = "mposition";
      if (mpos->count("--dim") == 0) c.dims = {2};
      return cvm::cmd_mposition(c, std::cout);
    }
    c.command = "demo-counterexample";
    return cvm::cmd_demo_counterexample(c, std::cout);
  } catch (const cvm::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
