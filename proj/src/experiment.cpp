#include "structgp/experiment.hpp"

#include "structgp/acyclicity.hpp"
#include "structgp/io.hpp"
#include "structgp/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace structgp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw std::invalid_argument("config: bad value '" + s + "' for key '" + key + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& key) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(item, key));
  if (out.empty()) throw std::invalid_argument("config: empty list for key '" + key + "'");
  return out;
}

bool parse_bool(const std::string& text, const std::string& key) {
  const std::string s = lower(trim(text));
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("config: bad boolean '" + text + "' for key '" + key + "'");
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto& al = cfg.learner.auglag;
  if (key == "k") cfg.k = parse_list<int>(value, key);
  else if (key == "md") cfg.md = parse_list<double>(value, key);
  else if (key == "n_lambda") cfg.n_lambda = parse_list<int>(value, key);
  else if (key == "r") cfg.r = parse_list<int>(value, key);
  else if (key == "n_per_task") cfg.n_per_task = parse_number<int>(value, key);
  else if (key == "reps") cfg.reps = parse_number<int>(value, key);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(value, key);
  else if (key == "sigma") cfg.sigma = parse_number<double>(value, key);
  else if (key == "random_init") cfg.random_init = parse_bool(value, key);
  else if (key == "lambda_min_ratio") cfg.learner.lambda_min_ratio = parse_number<double>(value, key);
  else if (key == "eps") al.eps = parse_number<double>(value, key);
  else if (key == "rho_max") al.rho_max = parse_number<double>(value, key);
  else if (key == "max_outer") al.max_outer = parse_number<int>(value, key);
  else if (key == "pgm.max_iters") al.pgm.max_iters = parse_number<int>(value, key);
  else if (key == "pgm.grad_tol") al.pgm.grad_tol = parse_number<double>(value, key);
  else if (key == "pgm.rel_tol") al.pgm.rel_tol = parse_number<double>(value, key);
  else if (key == "pgm.shrink") al.pgm.shrink = parse_number<double>(value, key);
  else if (key == "pgm.accelerated") al.pgm.accelerated = parse_bool(value, key);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

// Minimal CSV field splitter; fields may be double-quoted with "" escapes.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

const std::vector<std::string>& score_fields() {
  static const std::vector<std::string> f{"shd",      "extra",  "missing",
                                          "reversed", "precision", "recall",
                                          "precision_undefined", "recall_undefined", "rmse_s"};
  return f;
}

void write_score(std::ostream& out, const GraphScore* s) {
  if (s == nullptr) {
    for (std::size_t i = 0; i < score_fields().size(); ++i) out << ',';
    return;
  }
  out << ',' << s->shd << ',' << s->extra << ',' << s->missing << ',' << s->reversed << ','
      << format_real(s->precision) << ',' << format_real(s->recall) << ',' << int(s->precision_undefined) << ','
      << int(s->recall_undefined) << ',' << format_real(s->rmse_s);
}

std::optional<GraphScore> read_score(const std::map<std::string, std::string>& row, const std::string& prefix) {
  auto get = [&](const std::string& name) -> const std::string& {
    const auto it = row.find(prefix + name);
    if (it == row.end()) throw std::invalid_argument("report: missing column " + prefix + name);
    return it->second;
  };
  if (get("shd").empty()) return std::nullopt;
  GraphScore s;
  s.shd = parse_number<int>(get("shd"), prefix + "shd");
  s.extra = parse_number<int>(get("extra"), prefix + "extra");
  s.missing = parse_number<int>(get("missing"), prefix + "missing");
  s.reversed = parse_number<int>(get("reversed"), prefix + "reversed");
  s.precision = parse_number<double>(get("precision"), prefix + "precision");
  s.recall = parse_number<double>(get("recall"), prefix + "recall");
  s.precision_undefined = parse_number<int>(get("precision_undefined"), prefix + "precision_undefined") != 0;
  s.recall_undefined = parse_number<int>(get("recall_undefined"), prefix + "recall_undefined") != 0;
  s.rmse_s = parse_number<double>(get("rmse_s"), prefix + "rmse_s");
  return s;
}

GraphScore score_theta(const Theta& pred, const Theta& truth) {
  return score(Dag::from_support(pred.S), Dag::from_support(truth.S), pred.S, truth.S);
}

}  // namespace

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  const std::string n = lower(name);
  ExperimentConfig c;
  c.reps = 1;
  if (n == "toy") {
    c.name = "TOY";
    c.k = {4};
    c.md = {2};
    c.n_lambda = {256};
    c.r = {50};
  } else if (n == "exp1") {
    c.name = "EXP1";
    c.k = {10};
    c.md = {2};
    c.n_lambda = {50};
    c.r = {1, 2, 5, 10, 20, 35, 60, 100};
  } else if (n == "exp2") {
    c.name = "EXP2";
    c.k = {10};
    c.md = {3};
    c.n_lambda = {2, 5, 10, 25, 50, 100, 250, 512};
    c.r = {50};
    c.random_init = true;
  } else if (n == "exp3") {
    c.name = "EXP3";
    c.k = {2, 4, 6, 8, 10, 12, 16, 20};
    c.md = {1, 2, 3};
    c.n_lambda = {50};
    c.r = {50};
  } else if (n == "custom") {
    c.name = "custom";
  } else {
    throw std::invalid_argument("unknown experiment preset '" + name + "'");
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (k.empty() || md.empty() || n_lambda.empty() || r.empty()) {
    throw std::invalid_argument("experiment: every sweep needs at least one value");
  }
  for (int v : k) {
    if (v < 1) throw std::invalid_argument("experiment: k must be positive");
  }
  for (double v : md) {
    if (!(v >= 0.0)) throw std::invalid_argument("experiment: md must be nonnegative");
  }
  for (int v : n_lambda) {
    if (v < 1) throw std::invalid_argument("experiment: n_lambda must be positive");
  }
  for (int v : r) {
    if (v < 1) throw std::invalid_argument("experiment: r must be positive");
  }
  if (n_per_task < 1) throw std::invalid_argument("experiment: n_per_task must be positive");
  if (reps < 1) throw std::invalid_argument("experiment: reps must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("experiment: sigma must be positive");
  if (!(learner.lambda_min_ratio > 0.0 && learner.lambda_min_ratio <= 1.0)) {
    throw std::invalid_argument("experiment: lambda_min_ratio must be in (0, 1]");
  }
  learner.auglag.validate();
  if (sweep_points(*this).empty()) throw std::invalid_argument("experiment: no sweep point has md <= k - 1");
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    entries.emplace_back(lower(trim(line.substr(0, eq))), trim(line.substr(eq + 1)));
  }
  ExperimentConfig cfg;
  for (const auto& [key, value] : entries) {
    if (key == "name") cfg = ExperimentConfig::preset(value);
  }
  for (const auto& [key, value] : entries) {
    if (key != "name") apply_key(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig read_experiment_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_experiment_config(in);
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> out;
  for (int k : cfg.k) {
    for (double md : cfg.md) {
      if (md > std::max(0, k - 1)) continue;
      for (int nl : cfg.n_lambda) {
        for (int r : cfg.r) out.push_back({k, md, nl, r});
      }
    }
  }
  return out;
}

int ExperimentReport::failed() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const RepRow& r) { return !r.ok; }));
}

RepRow run_replicate(const ExperimentConfig& cfg, std::size_t point_index, const SweepPoint& point, int rep) {
  RepRow row;
  row.experiment = cfg.name;
  row.point_index = point_index;
  row.point = point;
  row.rep = rep;
  try {
    Rng rng = replicate_rng(cfg.seed, point_index, static_cast<std::uint64_t>(rep));
    const Dag truth_graph = sample_er_dag(point.k, point.md, rng);
    const Theta truth = sample_theta(truth_graph, rng, cfg.sigma);
    const Dataset data = sample_dataset(truth, point.r, cfg.n_per_task, rng);
    row.true_edges = truth_graph.edge_count();

    const Dag random_graph = sample_er_dag(point.k, point.md, rng);
    const Theta random_theta = sample_theta(random_graph, rng, cfg.sigma);
    row.baseline = score_theta(random_theta, truth);

    LearnerConfig lc = cfg.learner;
    lc.n_lambda = point.n_lambda;
    const Likelihood lik(data);
    const auto grid = lambda_grid(lik, cfg.sigma, lc.n_lambda, lc.lambda_min_ratio, lc.lambda_max);
    const FitResult result = select(fit_path(lik, grid, lc, cfg.sigma));
    row.lambda_star = result.selected.lambda;
    row.fit = score_theta(result.selected.theta, truth);

    if (cfg.random_init) {
      std::uniform_real_distribution<double> weight(-1.0, 1.0);
      std::uniform_real_distribution<double> log_scale(-0.5, 0.5);
      Matrix S = Matrix::Zero(point.k, point.k);
      for (int v = 0; v < point.k; ++v) {
        for (int u = 0; u < point.k; ++u) {
          if (u != v) S(v, u) = weight(rng);
        }
      }
      Vector ell(point.k);
      for (int v = 0; v < point.k; ++v) ell[v] = log_scale(rng);
      const auto pt = fit_point(lik, row.lambda_star, Theta(S, ell, cfg.sigma), lc.auglag);
      row.randinit = score_theta(pt.theta, truth);
    }
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, int jobs,
                                const std::function<void(const RepRow&)>& progress) {
  cfg.validate();
  const auto points = sweep_points(cfg);
  const std::size_t total = points.size() * static_cast<std::size_t>(cfg.reps);
  ExperimentReport report;
  report.rows.resize(total);

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t p = i / static_cast<std::size_t>(cfg.reps);
      const int rep = static_cast<int>(i % static_cast<std::size_t>(cfg.reps));
      report.rows[i] = run_replicate(cfg, p, points[p], rep);
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(report.rows[i]);
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "experiment,point,k,md,n_lambda,r,rep,status,true_edges,lambda_star";
  for (const char* prefix : {"", "baseline_", "randinit_"}) {
    for (const auto& f : score_fields()) out << ',' << prefix << f;
  }
  out << ",error\n";
  for (const auto& row : report.rows) {
    out << row.experiment << ',' << row.point_index << ',' << row.point.k << ',' << format_real(row.point.md) << ','
        << row.point.n_lambda << ',' << row.point.r << ',' << row.rep << ',' << (row.ok ? "ok" : "failed") << ',';
    if (row.ok) {
      out << row.true_edges << ',' << format_real(row.lambda_star);
      write_score(out, &row.fit);
      write_score(out, &row.baseline);
      write_score(out, row.randinit ? &*row.randinit : nullptr);
      out << ",\n";
    } else {
      out << ',';
      for (int i = 0; i < 3; ++i) write_score(out, nullptr);
      out << ',' << quote(row.error) << '\n';
    }
  }
}

ExperimentReport read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("report: empty input");
  const auto header = split_csv(trim(line));
  ExperimentReport report;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("report line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields");
    }
    std::map<std::string, std::string> m;
    for (std::size_t i = 0; i < header.size(); ++i) m[header[i]] = fields[i];
    auto get = [&](const std::string& name) -> const std::string& {
      const auto it = m.find(name);
      if (it == m.end()) throw std::invalid_argument("report: missing column " + name);
      return it->second;
    };
    RepRow row;
    row.experiment = get("experiment");
    row.point_index = parse_number<std::size_t>(get("point"), "point");
    row.point.k = parse_number<int>(get("k"), "k");
    row.point.md = parse_number<double>(get("md"), "md");
    row.point.n_lambda = parse_number<int>(get("n_lambda"), "n_lambda");
    row.point.r = parse_number<int>(get("r"), "r");
    row.rep = parse_number<int>(get("rep"), "rep");
    row.ok = get("status") == "ok";
    row.error = get("error");
    if (row.ok) {
      row.true_edges = parse_number<int>(get("true_edges"), "true_edges");
      row.lambda_star = parse_number<double>(get("lambda_star"), "lambda_star");
      const auto fit = read_score(m, "");
      const auto base = read_score(m, "baseline_");
      if (!fit || !base) throw std::invalid_argument("report line " + std::to_string(line_no) + ": missing scores");
      row.fit = *fit;
      row.baseline = *base;
      row.randinit = read_score(m, "randinit_");
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

Figure parse_figure(const std::string& name) {
  const std::string n = lower(name);
  if (n == "exp1") return Figure::Exp1;
  if (n == "exp2") return Figure::Exp2;
  if (n == "exp3") return Figure::Exp3;
  throw std::invalid_argument("unknown figure '" + name + "' (expected exp1, exp2, or exp3)");
}

void write_plot_data(std::ostream& out, const ExperimentReport& report, Figure figure, std::uint64_t seed) {
  auto key_of = [&](const RepRow& row) -> std::vector<std::string> {
    switch (figure) {
      case Figure::Exp1: return {std::to_string(row.point.r)};
      case Figure::Exp2: return {std::to_string(row.point.n_lambda)};
      case Figure::Exp3: return {std::to_string(row.point.k), format_real(row.point.md)};
    }
    return {};
  };
  std::vector<std::vector<std::string>> keys;
  std::vector<std::vector<const RepRow*>> groups;
  for (const auto& row : report.rows) {
    const auto key = key_of(row);
    const auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      groups.push_back({&row});
    } else {
      groups[static_cast<std::size_t>(it - keys.begin())].push_back(&row);
    }
  }

  switch (figure) {
    case Figure::Exp1: out << "r"; break;
    case Figure::Exp2: out << "n_lambda"; break;
    case Figure::Exp3: out << "k,md"; break;
  }
  out << ",n,failed,mean_shd,ci_lo,ci_hi,mean_extra,mean_missing,mean_reversed,mean_rmse_s,"
         "median_precision,precision_q25,precision_q75,median_recall,recall_q25,recall_q75,"
         "baseline_mean_shd,baseline_ci_lo,baseline_ci_hi,baseline_median_precision,baseline_precision_q25,"
         "baseline_precision_q75,baseline_median_recall,baseline_recall_q25,baseline_recall_q75,"
         "randinit_mean_shd,randinit_ci_lo,randinit_ci_hi\n";

  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<double> shd, extra, missing, reversed, rmse, prec, rec;
    std::vector<double> b_shd, b_prec, b_rec, ri_shd;
    int failed = 0;
    for (const RepRow* row : groups[g]) {
      if (!row->ok) {
        ++failed;
        continue;
      }
      shd.push_back(row->fit.shd);
      extra.push_back(row->fit.extra);
      missing.push_back(row->fit.missing);
      reversed.push_back(row->fit.reversed);
      rmse.push_back(row->fit.rmse_s);
      prec.push_back(row->fit.precision);
      rec.push_back(row->fit.recall);
      b_shd.push_back(row->baseline.shd);
      b_prec.push_back(row->baseline.precision);
      b_rec.push_back(row->baseline.recall);
      if (row->randinit) ri_shd.push_back(row->randinit->shd);
    }
    for (std::size_t i = 0; i < keys[g].size(); ++i) out << (i ? "," : "") << keys[g][i];
    out << ',' << shd.size() << ',' << failed;
    Rng rng = replicate_rng(seed, g, 0);
    auto mean_ci = [&](const std::vector<double>& v) {
      if (v.empty()) {
        out << ",,,";
        return;
      }
      const Interval ci = bootstrap_ci(v, rng);
      out << ',' << format_real(mean(v)) << ',' << format_real(ci.lo) << ',' << format_real(ci.hi);
    };
    auto plain_mean = [&](const std::vector<double>& v) { out << ',' << (v.empty() ? "" : format_real(mean(v))); };
    auto med_iqr = [&](const std::vector<double>& v) {
      if (v.empty()) {
        out << ",,,";
        return;
      }
      out << ',' << format_real(median(v)) << ',' << format_real(quantile(v, 0.25)) << ','
          << format_real(quantile(v, 0.75));
    };
    mean_ci(shd);
    plain_mean(extra);
    plain_mean(missing);
    plain_mean(reversed);
    plain_mean(rmse);
    med_iqr(prec);
    med_iqr(rec);
    mean_ci(b_shd);
    med_iqr(b_prec);
    med_iqr(b_rec);
    mean_ci(ri_shd);
    out << '\n';
  }
}

}  // namespace structgp
