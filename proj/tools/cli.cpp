#include "cli.hpp"

#include "imlike/imlike.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace imlike::cli {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

class UsageError : public Error {
 public:
  using Error::Error;
};

// Every option the subcommands may register. Unused fields keep their defaults.
struct Settings {
  std::string model;
  std::string dataset;
  std::string data_path;
  std::string out = "-";
  std::string grid;
  std::string grid2;
  std::string phi_grid;
  std::string x;
  std::string bf;
  std::string w = "0.5";
  std::string method = "inner";
  std::string sigma_cache;
  std::string ocd_case = "bounded";
  std::string alpha_list = "0.1";
  std::string ns = "20,80,320";
  double n = 0.0;
  double sd = 1.0;
  double kappa = 4.0;
  double a = std::numeric_limits<double>::quiet_NaN();  // unset: no marginal
  double theta = std::numeric_limits<double>::quiet_NaN();
  double shape = 1.0;
  double true_shape = 7.0;
  double true_scale = 3.0;
  double alpha = 0.1;
  Index M = 2000;
  Index n_draws = 10000;
  Index n_obs = 0;
  Index reps = 2000;
  Index posterior_draws = 4000;
  std::uint64_t seed = 1;
  bool allow_nonconverged = false;
  bool nuisance_grid = false;
  bool exact = false;
  BFSettings bf_settings;
};

// ------------------------------------------------------------------ parsing helpers

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("cannot parse " + what + ": '" + text + "'");
    }
  }
  if (values.empty()) throw UsageError("empty " + what);
  return values;
}

// "lo:hi:count"
Vector parse_grid(const std::string& text) {
  std::string spec = text;
  std::replace(spec.begin(), spec.end(), ':', ',');
  const std::vector<double> v = parse_list(spec, "grid");
  if (v.size() != 3 || !(v[1] > v[0]) || v[2] < 2 || v[2] != std::floor(v[2]))
    throw UsageError("grid must read lo:hi:count with lo < hi and count >= 2");
  return linspace(v[0], v[1], static_cast<Index>(v[2]));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat "key = value" lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(number) + " is not key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return entries;
}

bool truthy(const std::string& v) { return v == "1" || v == "true" || v == "yes" || v == "on"; }

// ------------------------------------------------------------------ datasets

std::string data_dir() {
  if (const char* env = std::getenv("IMLIKE_DATA_DIR"); env && *env) return env;
  return IMLIKE_DATA_DIR;
}

Data load_table(const std::string& path, Index min_cols) {
  const CsvData csv = read_csv_file(path);
  if (csv.values.rows() == 0) throw DatasetError("dataset " + path + " has no rows");
  if (csv.values.cols() < min_cols)
    throw DatasetError("dataset " + path + " needs at least " + std::to_string(min_cols) + " columns");
  return csv.values;
}

std::string named_dataset_path(const std::string& name) {
  if (name == "efron-law") return data_dir() + "/efron_law.csv";
  if (name == "wheel-regime") return data_dir() + "/wheel_regime.csv";
  throw UsageError("unknown dataset '" + name + "' (known: lehmann-travel, efron-law, wheel-regime)");
}

// Rows of data for the model, from --data or --dataset.
Data load_data(const Settings& s, Index min_cols) {
  if (!s.data_path.empty() && !s.dataset.empty()) throw UsageError("give either --data or --dataset, not both");
  if (!s.data_path.empty()) return load_table(s.data_path, min_cols);
  if (!s.dataset.empty()) return load_table(named_dataset_path(s.dataset), min_cols);
  throw UsageError("model " + s.model + " needs --data or --dataset");
}

BFData load_bf(const Settings& s) {
  if (!s.bf.empty()) {
    const std::vector<double> v = parse_list(s.bf, "--bf");
    if (v.size() != 6) throw UsageError("--bf expects n1,n2,mean1,mean2,sd1,sd2");
    BFData d{static_cast<int>(v[0]), static_cast<int>(v[1]), v[2], v[3], v[4], v[5]};
    if (d.n1 != v[0] || d.n2 != v[1]) throw UsageError("--bf sample sizes must be integers");
    d.validate();
    return d;
  }
  if (s.dataset.empty() || s.dataset == "lehmann-travel") return lehmann_travel();
  throw UsageError("model bf-profile takes --dataset lehmann-travel or --bf");
}

double require_x(const Settings& s) {
  if (s.x.empty()) throw UsageError("model " + s.model + " needs --x");
  const std::vector<double> v = parse_list(s.x, "--x");
  if (v.size() != 1) throw UsageError("--x must be a single number for model " + s.model);
  return v[0];
}

// ------------------------------------------------------------------ 1-D problems

struct Problem1D {
  std::function<double(double)> contour;  // exact, or a raw Monte Carlo estimate
  double mode = 0.0;
  double lower = -kInf;
  double upper = kInf;
  bool closed = false;
  double step = 1.0;
  bool monte_carlo = false;
  Index M = 0;
  Vector default_grid;
  std::function<double(double)> bayes_density;  // may be empty
  std::function<double(Rng&)> bayes_draw;       // may be empty
  std::optional<BFData> bf;
};

Problem1D make_problem(const Settings& s) {
  Problem1D p;
  if (s.model == "gaussian-loc") {
    const double x = require_x(s), sd = s.sd;
    if (!(sd > 0.0)) throw UsageError("--sd must be positive");
    p.contour = [x, sd](double t) { return chi2_sf((t - x) * (t - x) / (sd * sd), 1.0); };
    p.mode = x;
    p.step = sd;
    p.default_grid = linspace(x - 5 * sd, x + 5 * sd, 401);
    p.bayes_density = [x, sd](double t) { return normal_pdf((t - x) / sd) / sd; };
    p.bayes_draw = [x, sd](Rng& rng) { return x + sd * std_normal(rng); };
  } else if (s.model == "gamma-scale") {
    const double x = require_x(s), n = s.n;
    if (!(n > 0.0)) throw UsageError("model gamma-scale needs --n > 0");
    if (!(x > 0.0)) throw UsageError("model gamma-scale needs --x > 0");
    p.contour = [x, n](double t) { return t > 0.0 ? contour_gamma_scale_exact(x, n, t) : 0.0; };
    p.mode = x / n;
    p.lower = 0.0;
    p.step = p.mode / std::sqrt(n);
    p.default_grid = linspace(p.mode * 0.02, p.mode * 6.0, 400);
    p.bayes_density = [x, n](double t) {
      return t > 0.0 ? std::exp(n * std::log(x) - (n + 1.0) * std::log(t) - x / t - std::lgamma(n)) : 0.0;
    };
    p.bayes_draw = [x, n](Rng& rng) { return x / gamma_draw(rng, n); };
  } else if (s.model == "vonmises") {
    if (!(s.kappa > 0.0)) throw UsageError("--kappa must be positive");
    const Data raw = load_data(s, 1);
    const AnglesData angles(raw.col(0), s.kappa);
    const PolarStats ps = polar_stats(angles);
    const double g = ps.g, k = s.kappa * ps.u, kappa = s.kappa, u = ps.u;
    p.contour = [g, u, kappa](double t) { return contour_vonmises_cond(g, u, kappa, t); };
    p.mode = g;
    p.lower = g - kPi;
    p.upper = g + kPi;
    p.closed = true;
    p.step = 0.25;
    p.default_grid = linspace(g - kPi, g + kPi, 721);
    const double norm = 2.0 * kPi * std::cyl_bessel_i(0.0, k);
    p.bayes_density = [g, k, norm](double t) { return std::exp(k * std::cos(t - g)) / norm; };
    p.bayes_draw = [g, k](Rng& rng) { return von_mises_draw(rng, g, k); };
  } else if (s.model == "bf-profile") {
    const BFData d = load_bf(s);
    auto contour = std::make_shared<BfProfileContour>(d, BfProfileContour::Options{s.M, s.seed, s.nuisance_grid});
    p.contour = [contour](double phi) { return (*contour)(phi).value; };
    p.mode = d.mle_difference();
    const double se = std::sqrt(d.sd1 * d.sd1 / d.n1 + d.sd2 * d.sd2 / d.n2);
    p.step = se;
    p.monte_carlo = true;
    p.M = s.M;
    p.default_grid = linspace(p.mode - 10.0 * se, p.mode + 10.0 * se, 401);
    p.bf = d;  // Bayes draws come from bayes_bf_sample
  } else if (s.model == "correlation") {
    const Data x = standardize(load_data(s, 2).leftCols(2));
    auto model = std::make_shared<Correlation>();
    const Index M = s.M;
    const std::uint64_t seed = s.seed;
    p.contour = [model, x, M, seed](double r) {
      if (!(r > -1.0 && r < 1.0)) return 0.0;
      return contour_mc(*model, x, Vector::Constant(1, r), M, seed).value;
    };
    p.mode = model->mle(x)(0);
    p.lower = -1.0;
    p.upper = 1.0;
    p.step = 0.1;
    p.monte_carlo = true;
    p.M = M;
    p.default_grid = linspace(-0.995, 0.995, 200);
  } else if (s.model.empty()) {
    throw UsageError("--model is required");
  } else {
    throw UsageError("unknown model '" + s.model + "'");
  }
  return p;
}

// Contour usable for cuts and sampling. Monte Carlo contours go through an
// isotonized grid; exact ones are evaluated directly.
PossibilityContour make_contour(const Problem1D& p, const Vector& grid) {
  if (p.monte_carlo) {
    const double se = 0.5 / std::sqrt(static_cast<double>(p.M));
    return contour_grid(p.contour, grid, p.mode, se);
  }
  ContourOptions options;
  if (std::isfinite(p.lower)) options.lower = Vector::Constant(1, p.lower);
  if (std::isfinite(p.upper)) options.upper = Vector::Constant(1, p.upper);
  options.closed_domain = p.closed;
  options.step = p.step;
  auto f = p.contour;
  return PossibilityContour([f](const Vector& t) { return f(t(0)); }, Vector::Constant(1, p.mode), options);
}

Vector pick_grid(const Settings& s, const Problem1D& p) {
  return s.grid.empty() ? p.default_grid : parse_grid(s.grid);
}

// ------------------------------------------------------------------ output

struct Output {
  std::ostream* csv = nullptr;
  std::ostream* console = nullptr;
  std::unique_ptr<std::ofstream> file;
};

Output open_output(const Settings& s, std::ostream& out, std::ostream& err) {
  Output o;
  if (s.out == "-" || s.out.empty()) {
    o.csv = &out;
    o.console = &err;
  } else {
    o.file = std::make_unique<std::ofstream>(s.out);
    if (!*o.file) throw UsageError("cannot write " + s.out);
    o.csv = o.file.get();
    o.console = &out;
  }
  return o;
}

std::string describe(const Interval& i) {
  std::ostringstream os;
  os << "[" << (i.lower_unbounded ? std::string("-inf") : format_number(i.a)) << ", "
     << (i.upper_unbounded ? std::string("inf") : format_number(i.b)) << "]";
  return os.str();
}

// ------------------------------------------------------------------ commands

void cmd_contour(const Settings& s, const RunInfo& info, Output& o) {
  if (s.model == "gamma-shape-scale") {
    const GammaShapeScale model;
    const Data x = load_data(s, 1).leftCols(1);
    const Vector hat = fit_mle(model, x);
    const Matrix J = observed_info(model, x, hat);
    const Matrix cov = J.inverse();
    const Vector g1 = s.grid.empty() ? linspace(hat(0) - 4 * std::sqrt(cov(0, 0)), hat(0) + 4 * std::sqrt(cov(0, 0)), 41)
                                     : parse_grid(s.grid);
    const Vector g2 = s.grid2.empty() ? linspace(hat(1) - 4 * std::sqrt(cov(1, 1)), hat(1) + 4 * std::sqrt(cov(1, 1)), 41)
                                      : parse_grid(s.grid2);
    Matrix points(g1.size() * g2.size(), 2);
    for (Index i = 0; i < g1.size(); ++i)
      for (Index j = 0; j < g2.size(); ++j) points.row(i * g2.size() + j) << g1(i), g2(j);
    const ContourGrid grid = evaluate_grid(
        [&](const Vector& t) { return contour_mc(model, x, t, s.M, s.seed).value; }, points);
    Matrix rows(points.rows(), 3);
    rows << points, grid.plausibility;
    write_csv(*o.csv, {"theta_1", "theta_2", "plausibility"}, rows, &info);
    *o.console << "mle: " << format_number(hat(0)) << " " << format_number(hat(1)) << "\n";
    return;
  }
  const Problem1D p = make_problem(s);
  const Vector grid = pick_grid(s, p);
  Vector values(grid.size());
  parallel_for(grid.size(), [&](Index i) { values(i) = p.contour(grid(i)); });
  Matrix rows(grid.size(), 2);
  rows << grid, values;
  write_csv(*o.csv, {"theta", "plausibility"}, rows, &info);
  const PossibilityContour contour = make_contour(p, grid);
  *o.console << "mle: " << format_number(p.mode) << "\n";
  for (double a : {0.1, 0.05})
    *o.console << "cut " << format_number(a) << ": " << describe(alpha_cut_1d(contour, a).interval()) << "\n";
}

InnerSampleSet sample_1d(const Settings& s, const Problem1D& p, const PossibilityContour& contour) {
  if (s.method == "bayes") {
    if (p.bf) {
      const Vector draws = bayes_bf_sample(*p.bf, BfPrior::right_haar, s.n_draws, s.seed);
      InnerSampleSet out;
      out.theta = draws;
      out.levels.resize(draws.size());
      for (Index i = 0; i < draws.size(); ++i) out.levels(i) = contour(draws(i));
      out.pseudo.assign(static_cast<std::size_t>(draws.size()), false);
      out.seed = s.seed;
      out.provenance = "bayes";
      return out;
    }
    if (!p.bayes_draw) throw UsageError("no Bayes posterior for model " + s.model);
    InnerSampleSet out;
    out.theta.resize(s.n_draws, 1);
    out.levels.resize(s.n_draws);
    parallel_for(s.n_draws, [&](Index i) {
      Rng rng = derive_stream(s.seed, static_cast<std::uint64_t>(i));
      out.theta(i, 0) = p.bayes_draw(rng);
      out.levels(i) = contour(out.theta(i, 0));
    });
    out.pseudo.assign(static_cast<std::size_t>(s.n_draws), false);
    out.seed = s.seed;
    out.provenance = "bayes";
    return out;
  }
  if (s.method != "inner") throw UsageError("--method must be inner or bayes");
  if (s.w == "curve") {
    if (!p.bayes_density) throw UsageError("--w curve needs a posterior density; model " + s.model + " has none");
    const WeightCurve w = weight_curve(p.bayes_density, contour, default_alpha_grid());
    return sample_inner_1d(contour, s.n_draws, w, s.seed);
  }
  const std::vector<double> w = parse_list(s.w, "--w");
  if (w.size() != 1 || !(w[0] >= 0.0 && w[0] <= 1.0)) throw UsageError("--w must be a number in [0,1] or 'curve'");
  return sample_inner_1d(contour, s.n_draws, w[0], s.seed);
}

SigmaTable obtain_sigma_table(const Settings& s, const ContourFn& contour, const Vector& hat, const Matrix& J,
                              const RunInfo& info) {
  if (!s.sigma_cache.empty() && std::filesystem::exists(s.sigma_cache)) {
    std::ifstream in(s.sigma_cache);
    return SigmaTable::read_csv(in);
  }
  const SigmaTable table = fit_sigma_table(contour, hat, J, default_alpha_grid());
  if (!s.sigma_cache.empty()) {
    std::ofstream cache(s.sigma_cache);
    if (!cache) throw UsageError("cannot write sigma cache " + s.sigma_cache);
    table.write_csv(cache, &info);
  }
  return table;
}

void cmd_sample(const Settings& s, const RunInfo& info, Output& o) {
  if (s.n_draws <= 0) throw UsageError("--n-draws must be positive");
  const bool multi_gauss = s.model == "gaussian-loc" && s.x.find(',') != std::string::npos;
  if (s.model == "gamma-shape-scale" || multi_gauss) {
    Vector hat;
    Matrix J;
    ContourFn contour;
    std::shared_ptr<GammaShapeScale> model;
    Data x;
    if (multi_gauss) {
      const std::vector<double> v = parse_list(s.x, "--x");
      hat = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
      J = Matrix::Identity(hat.size(), hat.size()) / (s.sd * s.sd);
      const GaussianPossibilityParams params(hat, J.inverse());
      contour = [params](const Vector& t) { return gaussian_contour(t, params); };
    } else {
      model = std::make_shared<GammaShapeScale>();
      x = load_data(s, 1).leftCols(1);
      hat = fit_mle(*model, x);
      J = observed_info(*model, x, hat);
      const Index M = s.M;
      const std::uint64_t seed = s.seed;
      contour = [model, x, M, seed](const Vector& t) { return contour_mc(*model, x, t, M, seed).value; };
    }
    const SigmaTable table = obtain_sigma_table(s, contour, hat, J, info);
    if (!table.all_converged() && !s.allow_nonconverged)
      throw NumericError("sigma fit did not converge at every level; rerun with --allow-nonconverged to sample anyway");
    const InnerSampleSet draws = sample_inner_md(hat, J, table, s.n_draws, s.seed, s.allow_nonconverged);
    write_samples_csv(*o.csv, draws, &info);
    *o.console << "mle:";
    for (Index i = 0; i < hat.size(); ++i) *o.console << " " << format_number(hat(i));
    *o.console << "\nsample mean:";
    const Vector mean = draws.theta.colwise().mean();
    for (Index i = 0; i < mean.size(); ++i) *o.console << " " << format_number(mean(i));
    *o.console << "\n";
    return;
  }
  const Problem1D p = make_problem(s);
  const PossibilityContour contour = make_contour(p, pick_grid(s, p));
  const InnerSampleSet draws = sample_1d(s, p, contour);
  write_samples_csv(*o.csv, draws, &info);
  *o.console << "sample mean: " << format_number(draws.theta.col(0).mean()) << "\n";
}

void cmd_interval(const Settings& s, const RunInfo& info, Output& o) {
  const Problem1D p = make_problem(s);
  const std::vector<double> alphas = parse_list(s.alpha_list, "--alpha");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw UsageError("--alpha values must lie in (0,1)");
  std::vector<std::string> names;
  std::vector<std::array<double, 3>> rows;
  if (p.bf) {
    for (double a : alphas) {
      const Interval im = bf_im_interval(*p.bf, a, s.M, s.seed, s.nuisance_grid);
      const Interval welch = welch_interval(*p.bf, a);
      const Interval jeff = equal_tailed(bayes_bf_sample(*p.bf, BfPrior::jeffreys, s.posterior_draws, s.seed), a);
      const Interval haar = equal_tailed(bayes_bf_sample(*p.bf, BfPrior::right_haar, s.posterior_draws, s.seed), a);
      for (const auto& [name, iv] : {std::pair<std::string, Interval>{"im", im}, {"welch", welch},
                                     {"jeffreys", jeff}, {"right-haar", haar}}) {
        names.push_back(name);
        rows.push_back({a, iv.a, iv.b});
      }
    }
  } else {
    const PossibilityContour contour = make_contour(p, pick_grid(s, p));
    for (double a : alphas) {
      const Interval iv = alpha_cut_1d(contour, a).interval();
      names.push_back("im");
      rows.push_back({a, iv.lower_unbounded ? -kInf : iv.a, iv.upper_unbounded ? kInf : iv.b});
    }
  }
  if (const auto& c = o.csv; c) {
    *c << provenance_comment(info) << "\n" << "method,alpha,lower,upper\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
      *c << names[i] << "," << format_number(rows[i][0]) << "," << format_number(rows[i][1]) << ","
         << format_number(rows[i][2]) << "\n";
  }
  *o.console << "mle: " << format_number(p.mode) << "\n";
}

ContourGrid vonmises_joint_grid(const Problem1D& p, Index k) {
  ContourGrid joint{Matrix(k, 1), Vector(k)};
  joint.theta.col(0) = linspace(p.lower, p.upper, k);
  parallel_for(k, [&](Index i) { joint.plausibility(i) = p.contour(joint.theta(i, 0)); });
  return joint;
}

void cmd_marginal(const Settings& s, const RunInfo& info, Output& o) {
  if (s.model != "vonmises") throw UsageError("marginal supports --model vonmises (map cos(a theta))");
  const Problem1D p = make_problem(s);
  const double a = std::isnan(s.a) ? 1.0 : s.a;
  const ContourGrid joint = vonmises_joint_grid(p, 4001);
  const Vector phi = s.phi_grid.empty() ? linspace(-1.0, 1.0, 513) : parse_grid(s.phi_grid);
  const PossibilityContour marg = extension_contour(joint, [a](const Vector& t) { return std::cos(a * t(0)); }, phi);
  Matrix rows(phi.size(), 2);
  for (Index j = 0; j < phi.size(); ++j) rows.row(j) << phi(j), marg(phi(j));
  write_csv(*o.csv, {"phi", "plausibility"}, rows, &info);
  *o.console << "minimum plausibility: " << format_number(rows.col(1).minCoeff()) << "\n";
}

// ------------------------------------------------------------------ reports

void report_validity(const Settings& s, const RunInfo& info, Output& o) {
  if (s.reps < 2) throw UsageError("--reps must be at least 2");
  UniformityResult r;
  if (s.model == "gaussian-loc") {
    const double theta = std::isnan(s.theta) ? 0.0 : s.theta;
    const Index n = s.n_obs > 0 ? s.n_obs : 1;
    const GaussianLocation model(Matrix::Constant(1, 1, s.sd * s.sd));
    if (s.exact) {
      r = validity_sim(model, Vector::Constant(1, theta), n,
                       [&](const Data& x, Index) { return model.exact_contour(x, Vector::Constant(1, theta)); },
                       s.reps, s.seed);
    } else {
      r = validity_sim(model, Vector::Constant(1, theta), n, s.reps, s.M, s.seed);
    }
  } else if (s.model == "gamma-scale") {
    const double theta = std::isnan(s.theta) ? 2.0 : s.theta;
    const Index n = s.n_obs > 0 ? s.n_obs : 7;
    const GammaScale model(s.shape);
    if (s.exact) {
      const double total_shape = s.shape * static_cast<double>(n);
      r = validity_sim(model, Vector::Constant(1, theta), n,
                       [&](const Data& x, Index) { return contour_gamma_scale_exact(x.sum(), total_shape, theta); },
                       s.reps, s.seed);
    } else {
      r = validity_sim(model, Vector::Constant(1, theta), n, s.reps, s.M, s.seed);
    }
  } else if (s.model == "vonmises") {
    const double theta = std::isnan(s.theta) ? 1.35 : s.theta;
    const Index n = s.n_obs > 0 ? s.n_obs : 25;
    const VonMises model(s.kappa);
    const double kappa = s.kappa;
    r = validity_sim(model, Vector::Constant(1, theta), n,
                     [&](const Data& x, Index) {
                       const PolarStats ps = polar_stats(Vector(x.col(0)));
                       return contour_vonmises_cond(ps.g, ps.u, kappa, theta);
                     },
                     s.reps, s.seed);
  } else {
    throw UsageError("report validity supports gaussian-loc, gamma-scale and vonmises");
  }
  const Vector grid = linspace(0.01, 0.99, 99);
  Matrix rows(grid.size(), 2);
  for (Index j = 0; j < grid.size(); ++j) {
    const double F = static_cast<double>(std::upper_bound(r.values.data(), r.values.data() + r.values.size(), grid(j)) -
                                         r.values.data()) /
                     static_cast<double>(r.values.size());
    rows.row(j) << grid(j), F;
  }
  write_csv(*o.csv, {"alpha", "value"}, rows, &info);
  *o.console << "ks: " << format_number(r.ks) << "\nmax excess: " << format_number(r.max_excess) << "\n";
}

void report_coverage(const Settings& s, const RunInfo& info, Output& o) {
  CoverageOptions options;
  options.reps = s.reps;
  options.alpha = s.alpha;
  options.M = s.M;
  options.posterior_draws = s.posterior_draws;
  options.seed = s.seed;
  options.nuisance_grid = s.nuisance_grid;
  const auto rows = bf_coverage_table(s.bf_settings, options);
  write_coverage_csv(*o.csv, rows, &info);
  for (const auto& row : rows)
    *o.console << row.method << ": coverage " << format_number(row.coverage) << ", mean length "
               << format_number(row.mean_length) << "\n";
}

void report_bvm(const Settings& s, const RunInfo& info, Output& o) {
  GammaBvmOptions options;
  options.shape = s.true_shape;
  options.scale = s.true_scale;
  options.draws = s.n_draws;
  options.M = s.M;
  options.seed = s.seed;
  const std::vector<double> ns = parse_list(s.ns, "--ns");
  Matrix rows(static_cast<Index>(ns.size()), 3);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] >= 2) || ns[i] != std::floor(ns[i])) throw UsageError("--ns entries must be integers >= 2");
    const GammaBvmResult r = gamma_bvm_study(static_cast<Index>(ns[i]), options);
    rows.row(static_cast<Index>(i)) << ns[i], r.discrepancy, r.converged ? 1.0 : 0.0;
    *o.console << "n=" << ns[i] << ": discrepancy " << format_number(r.discrepancy)
               << (r.converged ? "" : " (sigma not converged)") << "\n";
  }
  write_csv(*o.csv, {"n", "discrepancy", "converged"}, rows, &info);
}

void report_noncred(const Settings& s, const RunInfo& info, Output& o) {
  const Vector grid = default_alpha_grid();
  Curve curve;
  const Problem1D p = make_problem(s);
  if (s.model == "vonmises" && !std::isnan(s.a)) {
    // marginal of cos(a theta)
    const double a = s.a;
    const ScalarMap m = [a](const Vector& t) { return std::cos(a * t(0)); };
    const ContourGrid joint = vonmises_joint_grid(p, 4001);
    const PossibilityContour marg = extension_contour(joint, m, linspace(-1.0, 1.0, 513));
    InnerSampleSet draws;
    if (s.method == "bayes") {
      draws = pushforward(sample_1d(s, p, make_contour(p, p.default_grid)), m);
    } else if (s.method == "inner") {
      draws = sample_inner_1d(marg, s.n_draws, 0.5, s.seed);
    } else {
      throw UsageError("--method must be inner or bayes");
    }
    curve = noncredibility_curve(draws, marg, grid);
  } else {
    const PossibilityContour contour = make_contour(p, pick_grid(s, p));
    curve = noncredibility_curve(sample_1d(s, p, contour), contour, grid);
  }
  write_curve_csv(*o.csv, curve, &info);
  *o.console << "max |deviation|: " << format_number(curve.max_abs_deviation()) << "\n";
}

void report_ocd(const Settings& s, const RunInfo& info, Output& o) {
  OcdCase which;
  if (s.ocd_case == "bounded") {
    which = OcdCase::bounded;
  } else if (s.ocd_case == "squared-norm") {
    which = OcdCase::squared_norm;
  } else if (s.ocd_case == "linear") {
    which = OcdCase::linear;
  } else {
    throw UsageError("--case must be bounded, squared-norm or linear");
  }
  if (s.x.empty()) throw UsageError("report ocd needs --x");
  const std::vector<double> v = parse_list(s.x, "--x");
  const Vector x = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  const Curve curve = ocd_study(which, x, default_alpha_grid(), s.n_draws, s.seed);
  write_curve_csv(*o.csv, curve, &info);
  *o.console << "max excess over 1 - alpha: " << format_number(curve.max_excess()) << "\n";
}

// ------------------------------------------------------------------ wiring

void add_model_options(CLI::App* app, Settings& s) {
  app->add_option("--model", s.model, "gaussian-loc | gamma-scale | vonmises | bf-profile | correlation | gamma-shape-scale");
  app->add_option("--dataset", s.dataset, "lehmann-travel | efron-law | wheel-regime");
  app->add_option("--data", s.data_path, "CSV file with a header line");
  app->add_option("--x", s.x, "observation (comma list for vectors)");
  app->add_option("--n", s.n, "gamma shape of the observation");
  app->add_option("--sd", s.sd, "Gaussian standard deviation")->capture_default_str();
  app->add_option("--kappa", s.kappa, "von Mises concentration")->capture_default_str();
  app->add_option("--bf", s.bf, "n1,n2,mean1,mean2,sd1,sd2 summaries");
  app->add_option("--M", s.M, "Monte Carlo replicates per contour value")->capture_default_str();
  app->add_flag("--nuisance-grid", s.nuisance_grid, "maximize the BF contour over a variance-ratio grid");
  app->add_option("--grid", s.grid, "lo:hi:count");
}

void add_common(CLI::App* app, Settings& s) {
  app->add_option("--seed", s.seed, "master seed")->capture_default_str();
  app->add_option("--out", s.out, "output CSV path, - for stdout")->capture_default_str();
  app->add_option("--config", "key = value file; flags override it");
}

std::string join_command(const std::vector<std::string>& args) {
  std::string line = "imlike";
  for (const auto& a : args) {
    line += ' ';
    if (a.find_first_of(" \t\"'") != std::string::npos) {
      line += '"' + a + '"';
    } else {
      line += a;
    }
  }
  return line;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  Settings s;
  CLI::App app{"Possibilistic inferential models and their inner probabilistic approximations", "imlike"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(IMLIKE_VERSION));

  std::map<std::string, std::function<void(const RunInfo&, Output&)>> actions;
  std::vector<std::pair<CLI::App*, std::string>> leaves;

  auto* contour = app.add_subcommand("contour", "evaluate a contour on a grid");
  add_model_options(contour, s);
  contour->add_option("--grid2", s.grid2, "second grid for two-parameter models");
  add_common(contour, s);
  leaves.emplace_back(contour, "contour");
  actions["contour"] = [&](const RunInfo& i, Output& o) { cmd_contour(s, i, o); };

  auto* sample = app.add_subcommand("sample", "draw from the inner probabilistic approximation");
  add_model_options(sample, s);
  sample->add_option("--n-draws", s.n_draws, "number of draws")->capture_default_str();
  sample->add_option("--w", s.w, "endpoint weight in [0,1], or 'curve'")->capture_default_str();
  sample->add_option("--method", s.method, "inner | bayes")->capture_default_str();
  sample->add_option("--sigma-cache", s.sigma_cache, "sigma table CSV, reused when present");
  sample->add_flag("--allow-nonconverged", s.allow_nonconverged, "sample even if a sigma level did not converge");
  add_common(sample, s);
  leaves.emplace_back(sample, "sample");
  actions["sample"] = [&](const RunInfo& i, Output& o) { cmd_sample(s, i, o); };

  auto* interval = app.add_subcommand("interval", "alpha-cuts and comparison intervals");
  add_model_options(interval, s);
  interval->add_option("--alpha", s.alpha_list, "level(s), comma separated")->capture_default_str();
  interval->add_option("--posterior-draws", s.posterior_draws, "draws for Bayes intervals")->capture_default_str();
  add_common(interval, s);
  leaves.emplace_back(interval, "interval");
  actions["interval"] = [&](const RunInfo& i, Output& o) { cmd_interval(s, i, o); };

  auto* marginal = app.add_subcommand("marginal", "extension-based marginal contour of cos(a theta)");
  add_model_options(marginal, s);
  marginal->add_option("--a", s.a, "frequency in cos(a theta), default 1");
  marginal->add_option("--phi-grid", s.phi_grid, "lo:hi:count");
  add_common(marginal, s);
  leaves.emplace_back(marginal, "marginal");
  actions["marginal"] = [&](const RunInfo& i, Output& o) { cmd_marginal(s, i, o); };

  auto* report = app.add_subcommand("report", "diagnostic studies");
  report->require_subcommand(1);

  auto* validity = report->add_subcommand("validity", "empirical CDF of the contour at the truth");
  add_model_options(validity, s);
  validity->add_option("--theta", s.theta, "true parameter");
  validity->add_option("--n-obs", s.n_obs, "observations per replicate");
  validity->add_option("--shape", s.shape, "known gamma shape per observation")->capture_default_str();
  validity->add_option("--reps", s.reps, "replicates")->capture_default_str();
  validity->add_flag("--exact", s.exact, "closed-form contour instead of Monte Carlo");
  add_common(validity, s);
  leaves.emplace_back(validity, "report validity");
  actions["report validity"] = [&](const RunInfo& i, Output& o) { report_validity(s, i, o); };

  auto* coverage = report->add_subcommand("coverage-bf", "Behrens-Fisher coverage table");
  coverage->add_option("--reps", s.reps, "replicates")->capture_default_str();
  coverage->add_option("--alpha", s.alpha, "interval level")->capture_default_str();
  coverage->add_option("--M", s.M, "bootstrap size of the IM contour")->capture_default_str();
  coverage->add_option("--posterior-draws", s.posterior_draws, "draws per Bayes interval")->capture_default_str();
  coverage->add_flag("--nuisance-grid", s.nuisance_grid, "maximize over a variance-ratio grid");
  coverage->add_option("--n1", s.bf_settings.n1)->capture_default_str();
  coverage->add_option("--n2", s.bf_settings.n2)->capture_default_str();
  coverage->add_option("--mu1", s.bf_settings.mu1)->capture_default_str();
  coverage->add_option("--mu2", s.bf_settings.mu2)->capture_default_str();
  coverage->add_option("--var1", s.bf_settings.var1)->capture_default_str();
  coverage->add_option("--var2", s.bf_settings.var2)->capture_default_str();
  add_common(coverage, s);
  leaves.emplace_back(coverage, "report coverage-bf");
  actions["report coverage-bf"] = [&](const RunInfo& i, Output& o) { report_coverage(s, i, o); };

  auto* bvm = report->add_subcommand("bvm", "Bernstein-von Mises check for gamma shape-scale");
  bvm->add_option("--ns", s.ns, "sample sizes, comma separated")->capture_default_str();
  bvm->add_option("--n-draws", s.n_draws, "inner draws per n")->capture_default_str();
  bvm->add_option("--M", s.M, "Monte Carlo replicates per contour value")->capture_default_str();
  bvm->add_option("--shape", s.true_shape, "true shape")->capture_default_str();
  bvm->add_option("--scale", s.true_scale, "true scale")->capture_default_str();
  add_common(bvm, s);
  leaves.emplace_back(bvm, "report bvm");
  actions["report bvm"] = [&](const RunInfo& i, Output& o) { report_bvm(s, i, o); };

  auto* noncred = report->add_subcommand("noncred", "non-credibility curve");
  add_model_options(noncred, s);
  noncred->add_option("--n-draws", s.n_draws, "number of draws")->capture_default_str();
  noncred->add_option("--w", s.w, "endpoint weight in [0,1], or 'curve'")->capture_default_str();
  noncred->add_option("--method", s.method, "inner | bayes")->capture_default_str();
  noncred->add_option("--a", s.a, "vonmises only: curve for the marginal of cos(a theta)");
  add_common(noncred, s);
  leaves.emplace_back(noncred, "report noncred");
  actions["report noncred"] = [&](const RunInfo& i, Output& o) { report_noncred(s, i, o); };

  auto* ocd = report->add_subcommand("ocd", "over-confidence curve");
  ocd->add_option("--case", s.ocd_case, "bounded | squared-norm | linear")->capture_default_str();
  ocd->add_option("--x", s.x, "observation (comma list for vectors)");
  ocd->add_option("--n-draws", s.n_draws, "posterior draws")->capture_default_str();
  add_common(ocd, s);
  leaves.emplace_back(ocd, "report ocd");
  actions["report ocd"] = [&](const RunInfo& i, Output& o) { report_ocd(s, i, o); };

  try {
    // --config is folded into the argument list: keys the command line does not
    // set are appended as flags.
    std::vector<std::string> cmd_args;
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) {
        config_path = args[++i];
      } else if (args[i].rfind("--config=", 0) == 0) {
        config_path = args[i].substr(9);
      } else {
        cmd_args.push_back(args[i]);
      }
    }
    if (!config_path.empty()) {
      CLI::App* leaf = nullptr;
      for (const auto& [app_ptr, name] : leaves) {
        const auto space = name.find(' ');
        const bool nested = space != std::string::npos;
        if (!nested && !cmd_args.empty() && cmd_args[0] == name) leaf = app_ptr;
        if (nested && cmd_args.size() > 1 && cmd_args[0] == name.substr(0, space) &&
            cmd_args[1] == name.substr(space + 1))
          leaf = app_ptr;
      }
      if (!leaf) throw UsageError("--config needs a subcommand");
      for (const auto& [key, value] : read_config(config_path)) {
        const std::string flag = "--" + key;
        CLI::Option* opt = leaf->get_option_no_throw(flag);
        if (!opt) throw UsageError("config key '" + key + "' is not an option of this command");
        const bool given = std::any_of(cmd_args.begin(), cmd_args.end(), [&](const std::string& a) {
          return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (given) continue;
        if (opt->get_type_size() == 0) {
          if (truthy(value)) cmd_args.push_back(flag);
        } else {
          cmd_args.push_back(flag);
          cmd_args.push_back(value);
        }
      }
    }
    std::vector<std::string> reversed(cmd_args.rbegin(), cmd_args.rend());
    app.parse(reversed);

    std::string chosen;
    for (const auto& [app_ptr, name] : leaves)
      if (app_ptr->parsed()) chosen = name;
    RunInfo info{join_command(args), s.seed};
    Output o = open_output(s, out, err);
    const auto start = std::chrono::steady_clock::now();
    actions.at(chosen)(info, o);
    o.csv->flush();
    if (chosen.rfind("report", 0) == 0) {
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      err << "# manifest: command=" << chosen << " seed=" << s.seed << " M=" << s.M << " reps=" << s.reps
          << " wall_time_s=" << format_number(wall) << "\n";
    }
    return kOk;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const DatasetError& e) {
    err << "error: " << e.what() << "\n";
    return kDataset;
  } catch (const DegenerateData& e) {
    err << "error: " << e.what() << "\n";
    return kDataset;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace imlike::cli
