#include "gslope/cli.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gslope/groups.hpp"
#include "gslope/gwas.hpp"
#include "gslope/io.hpp"
#include "gslope/lambda.hpp"
#include "gslope/sigma_estimation.hpp"
#include "gslope/simulation.hpp"
#include "gslope/solver.hpp"
#include "gslope/sorted_l1.hpp"
#include "gslope/version.hpp"

namespace gslope {
namespace {

using nlohmann::json;

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": not an integer: '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": not a number: '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

// "5" -> m copies of 5; "3,4,5" -> exactly m entries.
std::vector<int> parse_ranks(const std::string& text, int m) {
  std::vector<int> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_int(part, "--ranks"));
  if (out.size() == 1) out.assign(static_cast<std::size_t>(m), out[0]);
  if (static_cast<int>(out.size()) != m)
    throw std::invalid_argument("--ranks: expected a single value or one per group");
  return out;
}

std::optional<WeightRule> weight_rule_from(const std::string& name) {
  if (name == "one") return WeightRule::one;
  if (name == "sqrt_size") return WeightRule::sqrt_size;
  if (name == "size") return WeightRule::size;
  return std::nullopt;
}

const char* kind_name(LambdaKind k) {
  switch (k) {
    case LambdaKind::max: return "max";
    case LambdaKind::mean: return "mean";
    case LambdaKind::corrected: return "corrected";
    case LambdaKind::custom: break;
  }
  return "custom";
}

// Column named "value" if present, else the last column.
Eigen::VectorXd vector_from_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  Eigen::Index col = static_cast<Eigen::Index>(t.header.size()) - 1;
  for (std::size_t j = 0; j < t.header.size(); ++j)
    if (t.header[j] == "value") col = static_cast<Eigen::Index>(j);
  return table_to_matrix(t).col(col);
}

Eigen::VectorXd column_from_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.header.size() != 1)
    throw std::runtime_error(path + ": expected a single-column CSV");
  return table_to_matrix(t).col(0);
}

Eigen::VectorXd make_weight_vector(const std::string& source, const std::vector<int>& ranks) {
  if (auto rule = weight_rule_from(source)) return make_weights(*rule, ranks);
  Eigen::VectorXd w = vector_from_csv(source);
  if (w.size() != static_cast<Eigen::Index>(ranks.size()))
    throw std::invalid_argument(source + ": expected one weight per group");
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (!(w[i] > 0.0) || !std::isfinite(w[i]))
      throw std::invalid_argument(source + ": weights must be positive and finite");
  return w;
}

// Generator name or a CSV path with the sequence in a "value" column.
LambdaSequence make_lambda(const std::string& source, double q, const Eigen::VectorXd& w,
                           const std::vector<int>& ranks, int m, int n) {
  if (source == "max") return lambda_max(q, w, ranks, m);
  if (source == "mean") return lambda_mean(q, w, ranks, m);
  if (source == "corrected") {
    if (n <= 0) throw std::invalid_argument("a positive --n is required for corrected sequences");
    return lambda_corrected(q, w, ranks, m, n);
  }
  return LambdaSequence(vector_from_csv(source), LambdaKind::custom);
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  if (path.empty())
    write_csv(std::cout, header, rows);
  else
    write_csv(path, header, rows);
}

void write_json(const std::string& path, const json& j) {
  std::string text = j.dump(2);
  text += '\n';
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

struct LambdaCmd {
  std::string kind;
  double q = 0.1;
  int m = 0;
  std::string ranks = "1";
  std::string weights = "sqrt_size";
  int n = 0;
  std::string out;
};

int run_lambda(const LambdaCmd& c) {
  std::vector<int> ranks = parse_ranks(c.ranks, c.m);
  Eigen::VectorXd w = make_weight_vector(c.weights, ranks);
  LambdaSequence lam = make_lambda(c.kind, c.q, w, ranks, c.m, c.n);
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    rows.push_back({std::to_string(i + 1), format_double(lam[i])});
  write_table(c.out, {"index", "value"}, rows);
  return 0;
}

struct SolveCmd {
  std::string x, y, groups;
  std::string weights = "sqrt_size";
  std::string lambda;
  double q = 0.1;
  std::string sigma = "1";
  std::string out;
};

// Two columns, 1-based: variable_index, group_index. Groups are ordered by
// ascending group_index; every variable of X must appear exactly once.
GroupPartition read_groups_csv(const std::string& path, int p) {
  CsvTable t = read_csv(path);
  if (t.header.size() < 2)
    throw std::runtime_error(path + ": expected variable_index,group_index columns");
  std::map<long, std::vector<int>> by_group;
  for (const auto& row : t.rows) {
    int v = parse_int(row[0], "variable_index");
    long g = parse_int(row[1], "group_index");
    if (v < 1 || v > p)
      throw std::invalid_argument(path + ": variable_index out of range: " + row[0]);
    by_group[g].push_back(v - 1);
  }
  std::vector<std::vector<int>> groups;
  groups.reserve(by_group.size());
  for (auto& [id, vars] : by_group) groups.push_back(std::move(vars));
  const auto m = static_cast<Eigen::Index>(groups.size());
  return GroupPartition(std::move(groups), Eigen::VectorXd::Ones(m));
}

int run_solve(const SolveCmd& c) {
  Eigen::MatrixXd X = table_to_matrix(read_csv(c.x));
  Eigen::VectorXd y = column_from_csv(c.y);
  GroupedDesign design = build_grouped_design(X, read_groups_csv(c.groups, static_cast<int>(X.cols())));
  design.partition.weights = make_weight_vector(c.weights, design.ranks);
  LambdaSequence lam = make_lambda(c.lambda, c.q, design.partition.weights, design.ranks,
                                   design.num_groups(), design.n());

  SolveOptions opts;
  SolveResult res;
  double sigma_value = 1.0;
  const bool estimate = (c.sigma == "estimate");
  if (estimate) {
    SigmaEstimationResult se = solve_with_sigma_estimation(design, lam, y, opts);
    res = std::move(se.result);
    res.converged = res.converged && se.converged;
    sigma_value = se.sigma_hat;
  } else {
    opts.sigma = parse_double(c.sigma, "--sigma");
    if (!(opts.sigma > 0.0)) throw std::invalid_argument("--sigma must be positive or 'estimate'");
    res = solve_gslope(design, lam, y, opts);
    sigma_value = opts.sigma;
  }

  json j;
  j["beta"] = std::vector<double>(res.beta.begin(), res.beta.end());
  j["effects"] = std::vector<double>(res.effects.begin(), res.effects.end());
  std::vector<int> selected;
  for (int g : res.selected) selected.push_back(g + 1);
  j["selected"] = selected;
  j["diagnostics"] = json{{"converged", res.converged},
                          {"final_gap", res.final_gap},
                          {"final_infeasibility", res.final_infeasibility},
                          {"iterations", res.iterations},
                          {"lambda_kind", kind_name(lam.kind)},
                          {"objective", res.objective},
                          {"sigma", sigma_value},
                          {"sigma_estimated", estimate}};
  write_json(c.out, j);
  return res.converged ? 0 : 2;
}

struct SimulateCmd {
  std::string config, out;
  std::uint64_t seed = 0;
  int threads = 1;
  bool seed_set = false;
  bool threads_set = false;
};

DesignKind design_from(const std::string& name) {
  if (name == "identity") return DesignKind::identity;
  if (name == "orthogonal") return DesignKind::orthogonal;
  if (name == "gaussian") return DesignKind::gaussian;
  throw std::invalid_argument("config design: expected identity, orthogonal, or gaussian");
}

LambdaKind generator_from(const std::string& name) {
  if (name == "max") return LambdaKind::max;
  if (name == "mean") return LambdaKind::mean;
  if (name == "corrected") return LambdaKind::corrected;
  throw std::invalid_argument("config lambda: expected max, mean, or corrected");
}

template <typename T>
std::vector<T> number_or_array(const json& j, const char* what) {
  if (j.is_array()) {
    auto out = j.get<std::vector<T>>();
    if (out.empty()) throw std::invalid_argument(std::string("config ") + what + ": empty array");
    return out;
  }
  if (j.is_number()) return {j.get<T>()};
  throw std::invalid_argument(std::string("config ") + what + ": expected a number or an array");
}

int run_simulate(const SimulateCmd& c) {
  std::ifstream in(c.config);
  if (!in) throw std::runtime_error("cannot open " + c.config);
  json cfg = json::parse(in);

  SimConfig base;
  base.m = cfg.at("m").get<int>();
  base.n = cfg.at("n").get<int>();
  const json& gs = cfg.at("group_sizes");
  if (gs.is_number_integer()) {
    base.size_spec.kind = GroupSizeSpec::Kind::fixed;
    base.size_spec.fixed_size = gs.get<int>();
  } else if (gs.is_array()) {
    base.size_spec.kind = GroupSizeSpec::Kind::list;
    base.size_spec.sizes = gs.get<std::vector<int>>();
  } else if (gs.is_object()) {
    base.size_spec.kind = GroupSizeSpec::Kind::binomial;
    base.size_spec.trials = gs.at("trials").get<int>();
    base.size_spec.prob = gs.at("prob").get<double>();
  } else {
    throw std::invalid_argument("config group_sizes: expected an integer, an array, or {trials, prob}");
  }
  base.design = design_from(cfg.value("design", std::string("identity")));
  if (auto rule = weight_rule_from(cfg.value("weights", std::string("sqrt_size"))))
    base.weights_rule = *rule;
  else
    throw std::invalid_argument("config weights: expected one, sqrt_size, or size");
  base.lambda_kind = generator_from(cfg.value("lambda", std::string("max")));
  base.replications = cfg.at("replications").get<int>();
  if (base.replications <= 0)
    throw std::invalid_argument("config replications: must be at least 1");
  base.seed = cfg.value("seed", std::uint64_t{0});
  base.threads = cfg.value("threads", 1);
  if (c.seed_set) base.seed = c.seed;
  if (c.threads_set) base.threads = c.threads;

  std::vector<double> qs = number_or_array<double>(cfg.at("q"), "q");
  std::vector<int> ks = number_or_array<int>(cfg.at("k"), "k");

  // Cells share the seed, so cells with equal k see identical data.
  std::vector<std::vector<std::string>> rows;
  int failures = 0;
  for (double q : qs) {
    for (int k : ks) {
      SimConfig cell = base;
      cell.q = q;
      cell.k = k;
      SimulationReport rep = run_experiment(cell);
      failures += rep.failures;
      rows.push_back({format_double(q), std::to_string(k), std::to_string(cell.m),
                      std::to_string(cell.n), std::to_string(cell.replications),
                      std::to_string(rep.failures), format_double(rep.gfdr_hat),
                      format_double(rep.se_gfdr), format_double(rep.power_hat),
                      format_double(rep.se_power), format_double(rep.nominal_bound)});
    }
  }
  write_table(c.out,
              {"q", "k", "m", "n", "replications", "failures", "gfdr_hat", "se_gfdr",
               "power_hat", "se_power", "nominal_gfdr"},
              rows);
  return failures == 0 ? 0 : 2;
}

struct GwasCmd {
  std::string geno, pheno, out;
  double pi = 0.05;
  double r = 0.3;
  double q = 0.1;
};

GenotypeMatrix read_genotypes(const std::string& path) {
  CsvTable t = read_csv(path);
  Eigen::MatrixXi values(static_cast<Eigen::Index>(t.rows.size()),
                         static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      const std::string& f = t.rows[i][j];
      if (f == "0")
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0;
      else if (f == "1")
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1;
      else if (f == "2")
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 2;
      else
        throw std::runtime_error(path + ": genotype entries must be 0, 1, or 2 (got '" + f + "')");
    }
  }
  return GenotypeMatrix(std::move(values), t.header);
}

std::vector<std::string> id_list(const std::vector<int>& idx, const std::vector<std::string>& ids) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(ids[static_cast<std::size_t>(i)]);
  return out;
}

int run_gwas(const GwasCmd& c) {
  GenotypeMatrix g = read_genotypes(c.geno);
  Eigen::VectorXd y = column_from_csv(c.pheno);
  GeneGslopeReport rep = gene_gslope(g, y, c.pi, c.r, c.q, SolveOptions{});

  json clusters = json::object();
  for (const auto& [repr, members] : rep.clumps.clusters)
    clusters[g.snp_ids[static_cast<std::size_t>(repr)]] = id_list(members, g.snp_ids);
  json effects = json::object();
  for (std::size_t i = 0; i < rep.clumps.representatives.size(); ++i)
    effects[g.snp_ids[static_cast<std::size_t>(rep.clumps.representatives[i])]] =
        rep.effects[static_cast<Eigen::Index>(i)];

  json j;
  j["clusters"] = clusters;
  j["screened"] = id_list(rep.screened, g.snp_ids);
  j["selected_representatives"] = id_list(rep.selected_representatives, g.snp_ids);
  j["selected_snps"] = id_list(rep.selected_snps, g.snp_ids);
  j["effects"] = effects;
  j["sigma_hat"] = rep.sigma_hat;
  j["lambda"] = json{{"kind", kind_name(rep.lambda.kind)},
                     {"q", c.q},
                     {"pi", c.pi},
                     {"r", c.r},
                     {"source_snps", g.s()},
                     {"groups", static_cast<int>(rep.clumps.representatives.size())},
                     {"values", std::vector<double>(rep.lambda.values.begin(),
                                                    rep.lambda.values.end())}};
  j["converged"] = rep.converged;
  j["warnings"] = rep.warnings;
  write_json(c.out, j);
  return rep.converged ? 0 : 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"group SLOPE: group selection in linear regression with group FDR control"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  LambdaCmd lc;
  CLI::App* lambda_cmd = app.add_subcommand("lambda", "Generate a regularization sequence as CSV");
  lambda_cmd->add_option("--kind", lc.kind, "max, mean, or corrected")
      ->required()
      ->check(CLI::IsMember({"max", "mean", "corrected"}));
  lambda_cmd->add_option("--q", lc.q, "target group FDR level in (0,1)")->required();
  lambda_cmd->add_option("--m", lc.m, "number of groups")->required()->check(CLI::PositiveNumber);
  lambda_cmd->add_option("--ranks", lc.ranks, "group rank, one value or a comma list (default 1)");
  lambda_cmd->add_option("--weights", lc.weights, "one|sqrt_size|size or a CSV path (default sqrt_size)");
  lambda_cmd->add_option("--n", lc.n, "sample size (required for --kind corrected)");
  lambda_cmd->add_option("--out", lc.out, "output CSV path (default stdout)");

  SolveCmd sc;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Fit group SLOPE on CSV inputs");
  solve_cmd->add_option("--x", sc.x, "design matrix CSV, one row per observation")->required();
  solve_cmd->add_option("--y", sc.y, "response CSV, single column")->required();
  solve_cmd->add_option("--groups", sc.groups, "CSV of variable_index,group_index (1-based)")->required();
  solve_cmd->add_option("--weights", sc.weights, "one|sqrt_size|size or a CSV path (default sqrt_size)");
  solve_cmd->add_option("--lambda", sc.lambda, "max|mean|corrected or a CSV path")->required();
  solve_cmd->add_option("--q", sc.q, "FDR level for generated sequences (default 0.1)");
  solve_cmd->add_option("--sigma", sc.sigma, "noise level, or 'estimate' (default 1)");
  solve_cmd->add_option("--out", sc.out, "output JSON path (default stdout)");

  SimulateCmd mc;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo group FDR / power experiment");
  sim_cmd->add_option("--config", mc.config, "experiment config JSON")->required();
  sim_cmd->add_option("--out", mc.out, "output CSV path (default stdout)");
  CLI::Option* seed_opt = sim_cmd->add_option("--seed", mc.seed, "override the config seed");
  CLI::Option* threads_opt =
      sim_cmd->add_option("--threads", mc.threads, "override the config thread count")
          ->check(CLI::PositiveNumber);

  GwasCmd gc;
  CLI::App* gwas_cmd = app.add_subcommand("gwas", "Screen, clump, and select SNP clusters");
  gwas_cmd->add_option("--geno", gc.geno, "genotype CSV of 0/1/2 with a SNP id header")->required();
  gwas_cmd->add_option("--pheno", gc.pheno, "phenotype CSV, single column")->required();
  gwas_cmd->add_option("--pi", gc.pi, "screening p-value threshold (default 0.05)");
  gwas_cmd->add_option("--r", gc.r, "clumping correlation threshold (default 0.3)");
  gwas_cmd->add_option("--q", gc.q, "target group FDR level (default 0.1)");
  gwas_cmd->add_option("--out", gc.out, "output JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (lambda_cmd->parsed()) return run_lambda(lc);
    if (solve_cmd->parsed()) return run_solve(sc);
    if (sim_cmd->parsed()) {
      mc.seed_set = seed_opt->count() > 0;
      mc.threads_set = threads_opt->count() > 0;
      return run_simulate(mc);
    }
    if (gwas_cmd->parsed()) return run_gwas(gc);
  } catch (const NonconvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace gslope
