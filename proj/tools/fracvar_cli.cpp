// Command-line experiment harness: simulate paths, evaluate variation
// statistics and their exact-expectation oracles, run estimator and
// discrimination studies, emit CSV. All randomness derives from --seed, and
// identical command lines produce byte-identical output.

#include <CLI11.hpp>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fracvar/fracvar.hpp"

namespace {

using namespace fracvar;

// Shortest round-trip decimal representation.
std::string fmt(double x) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

std::string fmt_opt(const std::optional<double>& x) { return x ? fmt(*x) : std::string(); }

struct Options {
  std::string process = "fbm";
  double hurst = 0.5;
  double k = 0.5;
  bool k_set = false;
  int order = 1;
  double horizon = 1.0;
  int level = -1;
  std::uint64_t n = 0;
  double p = 2.0;
  double alpha = 0.0;
  bool alpha_set = false;
  std::string weight_exponent = "auto";
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t paths = 1;
  double alt_hurst = 0.0;
  bool alt_hurst_set = false;
  double alt_k = 0.0;
  bool alt_k_set = false;
  std::string stat = "pvar";
  std::string out;
  std::string format = "csv";
  int min_level = 10;
  int max_level = 15;
};

void add_common_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--process", opt.process, "process family")
      ->check(CLI::IsMember({"fbm", "bifbm", "trifbm", "nfbm"}));
  cmd->add_option("--hurst", opt.hurst, "Hurst index H");
  cmd->add_option("--k", opt.k, "second index K (bifbm/trifbm)")
      ->each([&](const std::string&) { opt.k_set = true; });
  cmd->add_option("--order", opt.order, "order n of the n-th order fBm");
  cmd->add_option("--t", opt.horizon, "horizon T")->capture_default_str();
  cmd->add_option("--level", opt.level, "dyadic level (2^level intervals)");
  cmd->add_option("--n", opt.n, "number of intervals (or Kurchenko n)");
  cmd->add_option("--seed", opt.seed, "base seed")->capture_default_str();
  cmd->add_option("--out", opt.out, "output path (default: stdout)");
  cmd->add_option("--format", opt.format, "output format")->capture_default_str()
      ->check(CLI::IsMember({"csv"}));
}

ProcessSpec spec_from(const Options& opt) {
  if (opt.process == "fbm") return ProcessSpec::fbm(opt.hurst);
  if (opt.process == "bifbm") {
    if (!opt.k_set) throw ParameterOutOfRange("bifbm requires --k");
    return ProcessSpec::bifbm(opt.hurst, opt.k);
  }
  if (opt.process == "trifbm") {
    if (!opt.k_set) throw ParameterOutOfRange("trifbm requires --k");
    return ProcessSpec::trifbm(opt.hurst, opt.k);
  }
  return ProcessSpec::nth_fbm(opt.order, opt.hurst);
}

Grid grid_from(const Options& opt) {
  if (opt.level >= 0 && opt.n > 0) {
    throw ParameterOutOfRange("give either --level or --n, not both");
  }
  if (opt.level >= 0) return dyadic_grid(opt.horizon, opt.level);
  if (opt.n > 0) return uniform_grid(opt.horizon, opt.n);
  throw ParameterOutOfRange("grid required: give --level or --n");
}

double resolve_weight_exponent(const Options& opt, const ProcessSpec& spec) {
  if (opt.weight_exponent != "auto") {
    double w = 0.0;
    auto [ptr, ec] = std::from_chars(
        opt.weight_exponent.data(), opt.weight_exponent.data() + opt.weight_exponent.size(), w);
    if (ec != std::errc{} || ptr != opt.weight_exponent.data() + opt.weight_exponent.size()) {
      throw ParameterOutOfRange("--weight-exponent must be a number or 'auto'");
    }
    return w;
  }
  if (spec.family == ProcessFamily::BifBm) return 2.0 * spec.hurst * spec.k - 1.0;
  if (spec.family == ProcessFamily::Fbm) return 2.0 * spec.hurst - 1.0;
  throw ParameterOutOfRange(
      "--weight-exponent auto resolves to 2HK-1 and needs an fbm or bifbm process");
}

// Sampling policy: fBm on a dyadic grid goes through the circulant fast path
// (exact in law, O(n log n)); everything else factors the kernel matrix once
// and draws all requested paths from it.
std::vector<PathSample> draw_paths(const ProcessSpec& spec, const Grid& grid,
                                   std::uint64_t base_seed, std::uint64_t count) {
  const int level = dyadic_level_of(grid);
  if (spec.family == ProcessFamily::Fbm && level >= 1 && level <= kCirculantLevelCap) {
    std::vector<PathSample> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      out.push_back(sample_fbm_circulant(spec.hurst, level, grid.horizon, base_seed + i));
    }
    return out;
  }
  return sample_paths(spec, grid, base_seed, count);
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::string experiment)
      : experiment_(std::move(experiment)) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::ios_base::failure("cannot open output file: " + path);
    }
  }

  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  void statistic_header() {
    stream() << "experiment,process,H,K,order,level,n,stat,param,value,reference,"
                "rel_error,seed\n";
  }

  // Statistic-output schema; missing fields stay empty, never zero.
  void statistic_row(const ProcessSpec& spec, std::optional<int> level,
                     std::optional<std::uint64_t> n, const std::string& stat,
                     std::optional<double> param, double value,
                     const std::optional<double>& reference,
                     const std::optional<double>& rel_error, std::uint64_t seed) {
    std::ostream& os = stream();
    os << experiment_ << ',' << family_name(spec.family) << ',' << fmt(spec.hurst) << ',';
    if (spec.family == ProcessFamily::BifBm || spec.family == ProcessFamily::TrifBm) {
      os << fmt(spec.k);
    }
    os << ',';
    if (spec.family == ProcessFamily::NthFbm) os << spec.order;
    os << ',';
    if (level) os << *level;
    os << ',';
    if (n) os << *n;
    os << ',' << stat << ',' << fmt_opt(param) << ',' << fmt(value) << ','
       << fmt_opt(reference) << ',' << fmt_opt(rel_error) << ',' << seed << '\n';
  }

  void flush_check() {
    stream().flush();
    if (!stream()) throw std::ios_base::failure("write failure");
  }

 private:
  std::string experiment_;
  std::ofstream file_;
};

std::optional<int> level_of(const Grid& grid) {
  const int level = dyadic_level_of(grid);
  if (level < 0) return std::nullopt;
  return level;
}

int cmd_simulate(const Options& opt) {
  const ProcessSpec spec = spec_from(opt);
  validate(spec);
  const Grid grid = grid_from(opt);
  const PathSample path = draw_paths(spec, grid, opt.seed, 1).front();

  CsvWriter w(opt.out, "simulate");
  std::ostream& os = w.stream();
  os << "t,value,process,H,K,order,level,n,seed\n";
  const std::optional<int> level = level_of(grid);
  for (std::size_t i = 0; i < path.grid.size(); ++i) {
    os << fmt(path.grid.points[i]) << ',' << fmt(path.values[i]) << ','
       << family_name(spec.family) << ',' << fmt(spec.hurst) << ',';
    if (spec.family == ProcessFamily::BifBm || spec.family == ProcessFamily::TrifBm) {
      os << fmt(spec.k);
    }
    os << ',';
    if (spec.family == ProcessFamily::NthFbm) os << spec.order;
    os << ',';
    if (level) os << *level;
    os << ',' << grid.intervals() << ',' << path.seed << '\n';
  }
  w.flush_check();
  return 0;
}

int cmd_qv(const Options& opt) {
  const ProcessSpec spec = spec_from(opt);
  validate(spec);

  Grid grid;
  std::uint64_t kurchenko_n = 0;
  if (opt.stat == "kurchenko") {
    if (spec.family != ProcessFamily::Fbm) {
      throw ParameterOutOfRange("--stat kurchenko requires --process fbm");
    }
    if (opt.n == 0) throw ParameterOutOfRange("--stat kurchenko requires --n");
    kurchenko_n = opt.n;
    grid = half_integer_grid(kurchenko_n);
  } else {
    grid = grid_from(opt);
  }

  if (opt.stat == "scaled" && !opt.alpha_set) {
    throw ParameterOutOfRange("--stat scaled requires --alpha");
  }
  const double we =
      opt.stat == "weighted" ? resolve_weight_exponent(opt, spec) : 0.0;

  const auto paths = draw_paths(spec, grid, opt.seed, opt.paths);

  CsvWriter w(opt.out, "qv");
  w.statistic_header();
  for (const PathSample& path : paths) {
    StatisticResult res;
    std::optional<double> param;
    if (opt.stat == "pvar") {
      res = p_variation_sum(path, opt.p);
      param = opt.p;
    } else if (opt.stat == "weighted") {
      res = weighted_qv(path, we);
      param = we;
    } else if (opt.stat == "scaled") {
      res = scaled_dyadic_sum(path, opt.alpha);
      param = opt.alpha;
    } else {
      res = kurchenko_statistic(path, kurchenko_n);
      param = static_cast<double>(kurchenko_n);
    }
    w.statistic_row(spec, level_of(grid), grid.intervals(), res.name, param, res.value,
                    res.reference, res.rel_error, path.seed);
  }
  w.flush_check();
  return 0;
}

int cmd_expected_qv(const Options& opt) {
  const ProcessSpec spec = spec_from(opt);
  validate(spec);
  const Grid grid = grid_from(opt);
  const double we = resolve_weight_exponent(opt, spec);
  const double value = expected_qv(spec, grid, we, opt.scale);

  StatisticResult res;
  res.name = "expected_qv";
  res.value = value;
  if (spec.family == ProcessFamily::BifBm &&
      std::abs(we - (2.0 * spec.hurst * spec.k - 1.0)) <= 1e-9) {
    res.set_reference(std::pow(2.0, 1.0 - spec.k) * grid.horizon);
  } else if (spec.family == ProcessFamily::Fbm &&
             std::abs(we - (2.0 * spec.hurst - 1.0)) <= 1e-9) {
    res.set_reference(grid.horizon);
  }

  CsvWriter w(opt.out, "expected-qv");
  w.statistic_header();
  w.statistic_row(spec, level_of(grid), grid.intervals(), res.name, we, res.value,
                  res.reference, res.rel_error, opt.seed);
  w.flush_check();
  return 0;
}

int cmd_estimate_hurst(const Options& opt) {
  const ProcessSpec spec = spec_from(opt);
  validate(spec);
  if (spec.family != ProcessFamily::Fbm) {
    throw ParameterOutOfRange("estimate-hurst requires --process fbm");
  }
  if (opt.n == 0) throw ParameterOutOfRange("estimate-hurst requires --n");
  const Grid grid = half_integer_grid(opt.n);
  const auto paths = draw_paths(spec, grid, opt.seed, opt.paths);

  CsvWriter w(opt.out, "estimate-hurst");
  w.statistic_header();
  for (const PathSample& path : paths) {
    const StatisticResult stat = kurchenko_statistic(path, opt.n);
    StatisticResult res;
    res.name = "hurst_v2";
    res.value = estimate_hurst_v2(stat.value);
    res.set_reference(spec.hurst);
    w.statistic_row(spec, std::nullopt, opt.n, res.name, static_cast<double>(opt.n),
                    res.value, res.reference, res.rel_error, path.seed);
  }
  w.flush_check();
  return 0;
}

struct HypothesisPair {
  Hypothesis h1;
  Hypothesis h2;
};

HypothesisPair hypotheses_from(const Options& opt, const ProcessSpec& truth) {
  if (!opt.alt_hurst_set && !opt.alt_k_set) {
    throw ParameterOutOfRange("alternative hypothesis required: --alt-hurst and/or --alt-k");
  }
  ProcessSpec alt = truth;
  if (opt.alt_hurst_set) alt.hurst = opt.alt_hurst;
  if (opt.alt_k_set) alt.k = opt.alt_k;
  validate(alt);
  return {Hypothesis{truth, "h1"}, Hypothesis{alt, "h2"}};
}

DiscriminationResult run_discriminator(const PathSample& path, const Hypothesis& h1,
                                       const Hypothesis& h2) {
  switch (h1.spec.family) {
    case ProcessFamily::Fbm: return discriminate_fbm(path, h1, h2);
    case ProcessFamily::BifBm: return discriminate_bifbm(path, h1, h2);
    case ProcessFamily::TrifBm: return discriminate_trifbm(path, h1, h2);
    default: throw ParameterOutOfRange("no discriminator for this process family");
  }
}

Grid discrimination_grid(const Options& opt, const ProcessSpec& truth) {
  if (truth.family == ProcessFamily::Fbm) {
    if (opt.n == 0) throw ParameterOutOfRange("fbm discrimination requires --n (half-integer grid of [0,n])");
    return half_integer_grid(opt.n);
  }
  return grid_from(opt);
}

int cmd_discriminate(const Options& opt) {
  const ProcessSpec truth = spec_from(opt);
  validate(truth);
  const auto [h1, h2] = hypotheses_from(opt, truth);
  const Grid grid = discrimination_grid(opt, truth);
  const PathSample path = draw_paths(truth, grid, opt.seed, 1).front();
  const DiscriminationResult result = run_discriminator(path, h1, h2);
  for (const std::string& msg : result.warnings) std::cerr << "warning: " << msg << '\n';

  CsvWriter w(opt.out, "discriminate");
  w.statistic_header();
  const Hypothesis* hyp[2] = {&h1, &h2};
  for (int i = 0; i < 2; ++i) {
    const StatisticResult& stat = result.statistics[i];
    w.statistic_row(hyp[i]->spec, level_of(grid), grid.intervals(), "discrepancy",
                    stat.meta.count("alpha") ? std::optional<double>(stat.meta.at("alpha"))
                                             : std::nullopt,
                    result.discrepancies[i], stat.reference, std::nullopt, path.seed);
  }
  const ProcessSpec& chosen = result.selected == h1.label ? h1.spec : h2.spec;
  w.statistic_row(chosen, level_of(grid), grid.intervals(), "selected", std::nullopt,
                  result.margin, std::nullopt, std::nullopt, path.seed);
  w.flush_check();
  return 0;
}

int cmd_power(const Options& opt) {
  const ProcessSpec truth = spec_from(opt);
  validate(truth);
  const auto [h1, h2] = hypotheses_from(opt, truth);
  const Grid grid = discrimination_grid(opt, truth);
  const PowerStudyResult result = power_study(truth, h1, h2, opt.paths, opt.seed, grid);

  CsvWriter w(opt.out, "power");
  w.statistic_header();
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const DiscriminationResult& rec = result.records[i];
    const ProcessSpec& chosen = rec.selected == h1.label ? h1.spec : h2.spec;
    w.statistic_row(chosen, level_of(grid), grid.intervals(), "selected", std::nullopt,
                    rec.margin, std::nullopt, std::nullopt, opt.seed + i);
  }
  w.statistic_row(truth, level_of(grid), opt.paths, "rate", std::nullopt, result.rate,
                  std::nullopt, std::nullopt, opt.seed);
  w.flush_check();
  return 0;
}

int cmd_calibrate_trifbm(const Options& opt) {
  if (!opt.k_set) throw ParameterOutOfRange("calibrate-trifbm requires --k");
  const TrifbmCalibration cal =
      calibrate_trifbm(opt.hurst, opt.k, opt.min_level, opt.max_level);
  const ProcessSpec spec = ProcessSpec::trifbm(opt.hurst, opt.k);

  CsvWriter w(opt.out, "calibrate-trifbm");
  w.statistic_header();
  for (std::size_t i = 0; i < cal.log2_expected.size(); ++i) {
    const int level = cal.min_level + static_cast<int>(i);
    w.statistic_row(spec, level, std::uint64_t{1} << level, "log2_expected_qv",
                    std::nullopt, cal.log2_expected[i], std::nullopt, std::nullopt,
                    opt.seed);
  }
  w.statistic_row(spec, std::nullopt, std::nullopt, "critical_alpha", std::nullopt,
                  cal.critical_alpha, 2.0 * opt.hurst * opt.k, std::nullopt, opt.seed);
  w.statistic_row(spec, std::nullopt, std::nullopt, "limit", cal.critical_alpha,
                  cal.limit, std::nullopt, std::nullopt, opt.seed);
  w.flush_check();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fracvar: exact simulation and Baxter-type variation statistics for "
      "fractional, bifractional, trifractional and n-th order fractional "
      "Brownian motions"};
  app.require_subcommand(1);

  Options opt;

  CLI::App* simulate = app.add_subcommand("simulate", "sample one path, write t,value CSV");
  add_common_flags(simulate, opt);

  CLI::App* qv = app.add_subcommand("qv", "variation statistic of simulated paths");
  add_common_flags(qv, opt);
  qv->add_option("--stat", opt.stat, "statistic")->capture_default_str()
      ->check(CLI::IsMember({"pvar", "weighted", "scaled", "kurchenko"}));
  qv->add_option("--p", opt.p, "p-variation exponent")->capture_default_str();
  qv->add_option("--alpha", opt.alpha, "dyadic scaling exponent")
      ->each([&](const std::string&) { opt.alpha_set = true; });
  qv->add_option("--weight-exponent", opt.weight_exponent,
                 "QV weight exponent, number or 'auto' (= 2HK-1)")->capture_default_str();
  qv->add_option("--paths", opt.paths, "number of independent paths")->capture_default_str();

  CLI::App* expected = app.add_subcommand("expected-qv", "exact expectation oracle");
  add_common_flags(expected, opt);
  expected->add_option("--weight-exponent", opt.weight_exponent,
                       "QV weight exponent, number or 'auto'")->capture_default_str();
  expected->add_option("--scale", opt.scale, "multiplier applied to the sum")->capture_default_str();

  CLI::App* estimate = app.add_subcommand("estimate-hurst",
                                          "Hurst estimate from the second-order increment statistic");
  add_common_flags(estimate, opt);
  estimate->add_option("--paths", opt.paths, "number of independent paths")->capture_default_str();

  CLI::App* discriminate = app.add_subcommand("discriminate",
                                              "classify one path between two hypotheses");
  add_common_flags(discriminate, opt);
  discriminate->add_option("--alt-hurst", opt.alt_hurst, "alternative H")
      ->each([&](const std::string&) { opt.alt_hurst_set = true; });
  discriminate->add_option("--alt-k", opt.alt_k, "alternative K")
      ->each([&](const std::string&) { opt.alt_k_set = true; });

  CLI::App* power = app.add_subcommand("power", "correct-selection rate over many paths");
  add_common_flags(power, opt);
  power->add_option("--alt-hurst", opt.alt_hurst, "alternative H")
      ->each([&](const std::string&) { opt.alt_hurst_set = true; });
  power->add_option("--alt-k", opt.alt_k, "alternative K")
      ->each([&](const std::string&) { opt.alt_k_set = true; });
  power->add_option("--paths", opt.paths, "number of independent paths")->capture_default_str();

  CLI::App* calibrate = app.add_subcommand("calibrate-trifbm",
                                           "oracle calibration of the trifractional critical scaling");
  add_common_flags(calibrate, opt);
  calibrate->add_option("--min-level", opt.min_level, "coarsest calibration level")->capture_default_str();
  calibrate->add_option("--max-level", opt.max_level, "finest calibration level")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt);
    if (qv->parsed()) return cmd_qv(opt);
    if (expected->parsed()) return cmd_expected_qv(opt);
    if (estimate->parsed()) return cmd_estimate_hurst(opt);
    if (discriminate->parsed()) return cmd_discriminate(opt);
    if (power->parsed()) return cmd_power(opt);
    if (calibrate->parsed()) return cmd_calibrate_trifbm(opt);
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
