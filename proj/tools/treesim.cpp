#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treesim/distributions.hpp"
#include "treesim/duality.hpp"
#include "treesim/errors.hpp"
#include "treesim/growth.hpp"
#include "treesim/oracle.hpp"
#include "treesim/parallel.hpp"
#include "treesim/rng.hpp"
#include "treesim/rtree.hpp"
#include "treesim/stats.hpp"

namespace {

using namespace treesim;

// accepts "0.4" or an exact fraction "1/3"
double parse_real(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return std::stod(text);
  const double num = std::stod(text.substr(0, slash));
  const double den = std::stod(text.substr(slash + 1));
  if (den == 0.0) throw domain_error("fraction with zero denominator");
  return num / den;
}

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) {
    if (text.find('.') != std::string::npos) return Rational(std::stod(text));
    return Rational(std::stoll(text));
  }
  return Rational(std::stoll(text.substr(0, slash)),
                  std::stoll(text.substr(slash + 1)));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw domain_error("cannot open output file: " + path);
  out << text;
}

std::string tree_row(int replicate, int step, const DiscreteTree& t) {
  std::ostringstream row;
  row << replicate << "," << step << "," << t.num_edges() << ","
      << t.leaf_labels().size() << "," << t.num_components() << ","
      << format_double(t.total_length()) << "," << format_double(t.total_mass())
      << "\n";
  return row.str();
}

struct SimulateOutput {
  std::string csv;
  DiscreteTree final_tree;
};

SimulateOutput simulate_one(const std::string& model, double beta, double alpha,
                            double gamma, double beta_prime, int steps, int depth,
                            int atoms, int replicate, std::uint64_t seed) {
  RngStream rng(seed, static_cast<std::uint64_t>(replicate));
  SimulateOutput out;
  if (model == "two_colour") {
    const auto states = grow_two_colour(beta, steps, rng);
    for (const auto& s : states) out.csv += tree_row(replicate, s.step, s.tree);
    out.final_tree = states.back().tree;
  } else if (model == "stable_mass") {
    const auto states = grow_stable_mass(beta, steps, rng);
    for (const auto& s : states) out.csv += tree_row(replicate, s.step, s.tree);
    out.final_tree = states.back().tree;
  } else if (model == "ford") {
    const auto trees = grow_ford(beta_prime, steps, rng);
    for (std::size_t m = 0; m < trees.size(); ++m)
      out.csv += tree_row(replicate, static_cast<int>(m + 1), trees[m]);
    out.final_tree = trees.back();
  } else if (model == "marchal") {
    out.final_tree = marchal(beta, steps, rng);
    out.csv += tree_row(replicate, steps, out.final_tree);
  } else if (model == "alpha_gamma") {
    out.final_tree = alpha_gamma(alpha, gamma, steps, rng);
    out.csv += tree_row(replicate, steps, out.final_tree);
  } else if (model == "discrete_two_colour") {
    out.final_tree = discrete_two_colour(beta, steps, rng);
    out.csv += tree_row(replicate, steps, out.final_tree);
  } else if (model == "recursive") {
    const RecursiveResult res = recursive_construction(beta, depth, atoms, rng);
    for (std::size_t lvl = 0; lvl < res.retained_mass.size(); ++lvl) {
      std::ostringstream row;
      row << replicate << "," << lvl << "," << res.tree.num_edges() << ",-1,"
          << res.tree.num_components() << ","
          << format_double(res.retained_mass[lvl]) << ","
          << format_double(res.tree.total_mass()) << "\n";
      out.csv += row.str();
    }
    out.final_tree = res.tree;
  } else if (model == "branch_replace") {
    const GrowthState state = grow_stable_mass(beta, steps, rng).back();
    out.final_tree = branch_point_replace(state, 1000, rng);
    out.csv += tree_row(replicate, steps, out.final_tree);
  } else {
    throw domain_error("unknown model: " + model);
  }
  return out;
}

int run_simulate(const std::string& model, const std::string& beta_text,
                 const std::string& alpha_text, const std::string& gamma_text,
                 const std::string& beta_prime_text, int steps, int depth, int atoms,
                 int replicates, std::uint64_t seed, std::string output,
                 const std::string& format) {
  const double beta = beta_text.empty() ? 0.5 : parse_real(beta_text);
  const double alpha = alpha_text.empty() ? 0.5 : parse_real(alpha_text);
  const double gamma = gamma_text.empty() ? alpha : parse_real(gamma_text);
  const double beta_prime =
      beta_prime_text.empty() ? beta / (1.0 - beta) : parse_real(beta_prime_text);
  if (output.empty()) {
    const char* dir = std::getenv("TREESIM_OUT_DIR");
    output = (dir ? std::string(dir) + "/" : std::string()) + model;
  }

  std::vector<SimulateOutput> results(replicates);
  parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t r) {
    results[r] = simulate_one(model, beta, alpha, gamma, beta_prime, steps, depth,
                              atoms, static_cast<int>(r), seed);
  });

  std::string csv = "replicate,step,edges,leaves,components,total_length,total_mass\n";
  for (const auto& r : results) csv += r.csv;
  write_text(output + ".csv", csv);
  if (format == "newick")
    write_text(output + ".nwk", results.front().final_tree.to_newick() + "\n");
  else if (format == "json")
    write_text(output + ".json", results.front().final_tree.to_json() + "\n");
  return 0;
}

int run_verify(const std::string& bundle, const std::string& beta_text, int k, int m,
               int replicates, const std::string& alpha_text,
               const std::string& theta_text, int n, std::uint64_t seed,
               const std::string& output) {
  TestBundle result;
  if (bundle == "theorem-1-1") {
    result = verify_theorem_1_1(parse_real(beta_text), k, replicates, seed);
  } else if (bundle == "ford-embedding") {
    result = verify_ford_embedding(parse_real(beta_text), replicates, m, seed);
  } else if (bundle == "duality") {
    result = make_bundle(
        "duality",
        {duality_check(parse_rational(alpha_text), parse_rational(theta_text), n)});
  } else if (bundle == "calibration") {
    auto reports = calibration(seed);
    result.name = "calibration";
    result.pass = true;
    for (const auto& r : reports) result.pass = result.pass && r.pass;
    result.reports = std::move(reports);
  } else {
    throw domain_error("unknown bundle: " + bundle);
  }
  write_text(output, result.to_json() + "\n");
  for (const auto& r : result.reports)
    std::cerr << (r.pass ? "pass" : "FAIL") << "  " << r.name << "\n";
  return result.pass ? 0 : 1;
}

int run_oracle(const std::string& model, const std::string& beta_text,
               const std::string& alpha_text, const std::string& gamma_text, int n,
               const std::string& output) {
  OracleModel om;
  OracleParams params;
  if (model == "marchal") {
    om = OracleModel::marchal;
    params.beta = parse_rational(beta_text);
  } else if (model == "ford") {
    om = OracleModel::ford;
    const Rational b = parse_rational(beta_text);
    params.beta = b / (1 - b);  // beta_prime
  } else if (model == "alpha_gamma") {
    om = OracleModel::alpha_gamma;
    params.alpha = parse_rational(alpha_text);
    params.gamma = parse_rational(gamma_text);
  } else if (model == "discrete_two_colour") {
    om = OracleModel::discrete_two_colour;
    params.beta = parse_rational(beta_text);
  } else {
    throw domain_error("unknown oracle model: " + model);
  }
  const auto probs = shape_prob_oracle(om, params, n);
  std::string json = "{\"model\":\"" + model + "\",\"n\":" + std::to_string(n) +
                     ",\"shapes\":[";
  bool first = true;
  Rational total = 0;
  for (const auto& [key, p] : probs) {
    if (!first) json += ",";
    first = false;
    std::ostringstream frac;
    frac << p;
    json += "{\"shape\":\"" + key + "\",\"prob\":\"" + frac.str() +
            "\",\"value\":" + format_double(static_cast<double>(p)) + "}";
    total += p;
  }
  std::ostringstream tot;
  tot << total;
  json += "],\"total\":\"" + tot.str() + "\"}";
  write_text(output, json + "\n");
  return 0;
}

int run_export(const std::string& input, const std::string& to,
               const std::string& output) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw domain_error("cannot open input file: " + input);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw domain_error("empty input file");
  const DiscreteTree tree = text[first] == '{' ? DiscreteTree::from_json(text)
                                               : DiscreteTree::from_newick(text);
  tree.validate();
  write_text(output, (to == "json" ? tree.to_json() : tree.to_newick()) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-scale random tree simulator and verifier"};
  app.require_subcommand(1);

  std::string model, beta_text, alpha_text, gamma_text, beta_prime_text, theta_text;
  std::string output, format = "json", bundle, input, to = "newick";
  int steps = 10, depth = 3, atoms = 5, replicates = 1, k = 2, m = 4, n = 4;
  int threads = 0;
  std::uint64_t seed = 1;

  auto* sim = app.add_subcommand("simulate", "sample a model and export results");
  sim->add_option("--model", model)->required();
  sim->add_option("--beta", beta_text);
  sim->add_option("--alpha", alpha_text);
  sim->add_option("--gamma", gamma_text);
  sim->add_option("--beta-prime", beta_prime_text);
  sim->add_option("--n,--steps", steps);
  sim->add_option("--depth", depth);
  sim->add_option("--atoms", atoms);
  sim->add_option("--replicates", replicates);
  sim->add_option("--seed", seed);
  sim->add_option("--output", output);
  sim->add_option("--format", format)->check(CLI::IsMember({"csv", "json", "newick"}));
  sim->add_option("--threads", threads);

  auto* ver = app.add_subcommand("verify", "run a named verification bundle");
  ver->add_option("--bundle", bundle)->required();
  ver->add_option("--beta", beta_text);
  ver->add_option("--k", k);
  ver->add_option("--m", m);
  ver->add_option("--n", n);
  ver->add_option("--alpha", alpha_text);
  ver->add_option("--theta", theta_text);
  ver->add_option("--replicates", replicates);
  ver->add_option("--seed", seed)->required();
  ver->add_option("--output", output);
  ver->add_option("--threads", threads);

  auto* ora = app.add_subcommand("oracle", "exact shape probabilities");
  ora->add_option("--model", model)->required();
  ora->add_option("--beta", beta_text);
  ora->add_option("--alpha", alpha_text);
  ora->add_option("--gamma", gamma_text);
  ora->add_option("--n", n)->required();
  ora->add_option("--output", output);

  auto* exp = app.add_subcommand("export", "convert between tree formats");
  exp->add_option("--input", input)->required();
  exp->add_option("--to", to)->check(CLI::IsMember({"newick", "json"}));
  exp->add_option("--output", output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    set_worker_threads(threads);
    if (sim->parsed())
      return run_simulate(model, beta_text, alpha_text, gamma_text, beta_prime_text,
                          steps, depth, atoms, replicates, seed, output, format);
    if (ver->parsed())
      return run_verify(bundle, beta_text, k, m, replicates, alpha_text, theta_text,
                        n, seed, output);
    if (ora->parsed())
      return run_oracle(model, beta_text, alpha_text, gamma_text, n, output);
    if (exp->parsed()) return run_export(input, to, output);
  } catch (const capability_error& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
