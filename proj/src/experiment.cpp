#include "blockid/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "blockid/errors.hpp"
#include "blockid/io.hpp"
#include "blockid/mixing.hpp"
#include "json.hpp"

namespace blockid::experiment {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && (out.front() == '"' || out.front() == '\'') && out.back() == out.front()) {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

template <class Int>
Int parse_uint(std::string_view key, std::string_view text) {
  Int v{};
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || t.front() == '-') {
    throw std::invalid_argument("config: '" + std::string(key) + "' expects a non-negative integer, got '" + t + "'");
  }
  return v;
}

double parse_double(std::string_view key, std::string_view text) {
  const auto t = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + std::string(key) + "' expects a number, got '" + t + "'");
  }
}

bool parse_bool(std::string_view key, std::string_view text) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw std::invalid_argument("config: '" + std::string(key) + "' expects true/false, got '" + t + "'");
}

std::vector<std::size_t> parse_size_list(std::string_view key, std::string_view text) {
  auto t = trim(text);
  if (!t.empty() && t.front() == '[' && t.back() == ']') t = t.substr(1, t.size() - 2);
  std::vector<std::size_t> out;
  std::istringstream in(t);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_uint<std::size_t>(key, item));
  }
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  generative.validate();
  train.validate();
  if (seeds.empty()) throw std::invalid_argument("config: seed list must not be empty");
  if (threshold_trials < 1) throw std::invalid_argument("config: threshold_trials must be >= 1");
  if (sizes.n_fit < 3 || sizes.n_eval < 2) throw std::invalid_argument("config: eval sizes too small");
}

ExperimentConfig ExperimentConfig::preset(std::string_view name) {
  ExperimentConfig cfg;
  if (name == "desk") return cfg;
  if (name == "paper") {
    cfg.train.batch_pairs = 6144;
    cfg.train.iterations = 300'000;
    cfg.sizes = {20'480, 40'960};
    cfg.threshold_trials = 24'975;
    return cfg;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "' (expected desk or paper)");
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  auto& g = generative;
  auto& t = train;
  if (key == "n_c") g.n_c = parse_uint<std::size_t>(key, value);
  else if (key == "n_s") g.n_s = parse_uint<std::size_t>(key, value);
  else if (key == "p_change") g.p_change = parse_double(key, value);
  else if (key == "stat_dep") g.stat_dep = parse_bool(key, value);
  else if (key == "causal_dep") g.causal_dep = parse_bool(key, value);
  else if (key == "iterations") t.iterations = parse_uint<std::size_t>(key, value);
  else if (key == "batch_pairs") t.batch_pairs = parse_uint<std::size_t>(key, value);
  else if (key == "tau") t.tau = parse_double(key, value);
  else if (key == "objective") t.objective = encoder::objective_from_string(trim(value));
  else if (key == "barlow_lambda") t.barlow_lambda = parse_double(key, value);
  else if (key == "n_enc") t.n_enc = parse_uint<std::size_t>(key, value);
  else if (key == "lr") t.lr = parse_double(key, value);
  else if (key == "reduction") {
    const auto v = trim(value);
    if (v == "mean") t.reduction = encoder::Reduction::mean;
    else if (v == "sum") t.reduction = encoder::Reduction::sum;
    else throw std::invalid_argument("config: 'reduction' expects mean or sum, got '" + v + "'");
  } else if (key == "hidden_multipliers") t.hidden_multipliers = parse_size_list(key, value);
  else if (key == "trace_every") t.trace_every = parse_uint<std::size_t>(key, value);
  else if (key == "n_fit") sizes.n_fit = parse_uint<std::size_t>(key, value);
  else if (key == "n_eval") sizes.n_eval = parse_uint<std::size_t>(key, value);
  else if (key == "threshold_trials") threshold_trials = parse_uint<std::size_t>(key, value);
  else if (key == "seeds") seeds = parse_seed_list(value);
  else if (key == "out_dir") out_dir = trim(value);
  else if (key == "resume") resume = parse_bool(key, value);
  else throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::canonical() const {
  const auto& g = generative;
  const auto& t = train;
  return {
      {"n_c", std::to_string(g.n_c)},
      {"n_s", std::to_string(g.n_s)},
      {"p_change", io::format_double(g.p_change)},
      {"stat_dep", bool_text(g.stat_dep)},
      {"causal_dep", bool_text(g.causal_dep)},
      {"iterations", std::to_string(t.iterations)},
      {"batch_pairs", std::to_string(t.batch_pairs)},
      {"tau", io::format_double(t.tau)},
      {"objective", encoder::to_string(t.objective)},
      {"barlow_lambda", io::format_double(t.barlow_lambda)},
      {"n_enc", std::to_string(t.n_enc)},
      {"lr", io::format_double(t.lr)},
      {"reduction", t.reduction == encoder::Reduction::mean ? "mean" : "sum"},
      {"hidden_multipliers", join(t.hidden_multipliers)},
      {"trace_every", std::to_string(t.trace_every)},
      {"n_fit", std::to_string(sizes.n_fit)},
      {"n_eval", std::to_string(sizes.n_eval)},
      {"threshold_trials", std::to_string(threshold_trials)},
  };
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  out << "# config_hash = " << hash() << '\n';
  for (const auto& [k, v] : canonical()) out << k << " = " << v << '\n';
  out << "seeds = ";
  for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
  out << "\nout_dir = " << out_dir.string() << '\n';
  return out.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : canonical()) {
    for (char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  return hex64(h);
}

void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1));
  }
}

void apply_config_file(ExperimentConfig& cfg, const fs::path& path) {
  apply_config_text(cfg, io::read_file(path));
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw std::invalid_argument("override '" + std::string(assignment) + "' is not key=value");
  }
  cfg.set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t s : parse_size_list("seeds", text)) seeds.push_back(s);
  if (seeds.empty()) throw std::invalid_argument("seed list must not be empty");
  return seeds;
}

// ---------------------------------------------------------------- runs

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate: no values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

namespace {

struct Previous {
  SeedResult result;
  fs::path dir;
};

std::optional<Previous> find_previous(const ExperimentConfig& cfg, const std::string& hash,
                                        std::uint64_t seed) {
  if (!fs::is_directory(cfg.out_dir)) return std::nullopt;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const auto seed_dir = dir / ("seed_" + std::to_string(seed));
    const auto report = seed_dir / "report.json";
    if (!fs::exists(report)) continue;
    try {
      const auto j = nlohmann::json::parse(io::read_file(report));
      if (j.at("config_hash").get<std::string>() != hash) continue;
      const auto& r = j.at("report");
      SeedResult res;
      res.seed = seed;
      res.r2_content = r.at("r2_content_nonlinear").get<double>();
      res.r2_style = r.at("r2_style_nonlinear").get<double>();
      res.r2_content_linear = r.at("r2_content_linear").get<double>();
      res.r2_style_linear = r.at("r2_style_linear").get<double>();
      res.cond_threshold = j.at("cond_threshold").get<double>();
      res.final_loss = j.at("final_loss").get<double>();
      res.reused = true;
      return Previous{res, seed_dir};
    } catch (const std::exception&) {
      continue;
    }
  }
  return std::nullopt;
}

SeedResult run_seed(const ExperimentConfig& cfg, const std::string& hash, const fs::path& dir,
                    std::uint64_t seed, const Logger& log) {
  auto gcfg = cfg.generative;
  gcfg.seed = seed;
  auto tcfg = cfg.train;
  tcfg.seed = seed;
  const std::size_t dim = gcfg.latent_dim();

  numcore::RngStream root(seed);
  auto process_rng = root.split();
  auto mixing_rng = root.split();
  auto train_rng = root.split();
  auto eval_rng = root.split();

  std::string stage = "build_process";
  try {
    const auto proc = genproc::build_process(gcfg, process_rng);

    stage = "sample_mixing";
    const double threshold = mixing::precompute_cond_threshold(dim, cfg.threshold_trials, mixing_rng);
    const auto mix = mixing::sample_mixing(dim, threshold, mixing_rng);
    io::write_file_atomic(dir / "mixing.json", mix.to_json());

    stage = "train";
    const auto t0 = std::chrono::steady_clock::now();
    const auto total = tcfg.iterations;
    const auto result = encoder::train(proc, gcfg, tcfg, mix, train_rng,
                                       [&](std::size_t it, double loss) {
                                         if (it % std::max<std::size_t>(1, total / 10) == 0 || it == total) {
                                           say(log, "  seed " + std::to_string(seed) + " it " +
                                                        std::to_string(it) + "/" + std::to_string(total) +
                                                        " loss " + fixed(loss, 5));
                                         }
                                       });
    say(log, "  seed " + std::to_string(seed) + " trained in " + fixed(seconds_since(t0), 1) + " s");
    encoder::save_checkpoint(result.encoder,
                             {seed, tcfg.iterations, hash, encoder::to_string(tcfg.objective)},
                             dir / "checkpoint.json");
    encoder::write_loss_trace(result.trace, dir / "loss_trace.csv", hash, seed);

    stage = "evaluate";
    const auto& enc = result.encoder;
    const eval::Representation rep = [&enc](const numcore::Matrix& x) {
      return encoder::forward(enc, x);
    };
    auto report = eval::evaluate_representation(rep, proc, mix, cfg.sizes, eval_rng);
    report.seed = seed;

    SeedResult res;
    res.seed = seed;
    res.r2_content = report.r2_content_nonlinear();
    res.r2_style = report.r2_style_nonlinear();
    res.r2_content_linear = report.r2_content_linear();
    res.r2_style_linear = report.r2_style_linear();
    res.cond_threshold = threshold;
    res.final_loss = result.trace.empty() ? 0.0 : result.trace.back().loss;

    stage = "write_report";
    nlohmann::json j{{"config_hash", hash},
                     {"seed", seed},
                     {"cond_threshold", threshold},
                     {"mixing_attempts", mix.attempts()},
                     {"final_loss", res.final_loss},
                     {"report", nlohmann::json::parse(report.to_json())}};
    io::write_file_atomic(dir / "report.json", j.dump(2));
    return res;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, seed, e.what());
  }
}

}  // namespace

RunSummary run_single(const ExperimentConfig& cfg, const std::string& label, const Logger& log) {
  cfg.validate();
  RunSummary summary;
  summary.label = label;
  summary.config_hash = cfg.hash();
  summary.generative = cfg.generative;
  summary.n_enc = cfg.train.n_enc;
  const fs::path run_dir = cfg.out_dir / label;
  io::write_file_atomic(run_dir / "config.txt", cfg.to_text());

  for (std::uint64_t seed : cfg.seeds) {
    const fs::path seed_dir = run_dir / ("seed_" + std::to_string(seed));
    std::optional<SeedResult> res;
    if (cfg.resume) {
      if (auto prev = find_previous(cfg, summary.config_hash, seed)) {
        say(log, "[" + label + "] seed " + std::to_string(seed) + ": reusing " + prev->dir.string());
        // Keep every label directory self-contained.
        if (!fs::equivalent(prev->dir.parent_path(), run_dir)) {
          fs::create_directories(seed_dir);
          fs::copy(prev->dir, seed_dir, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
        }
        res = prev->result;
      }
    }
    if (!res) {
      say(log, "[" + label + "] seed " + std::to_string(seed) + ": training");
      res = run_seed(cfg, summary.config_hash, seed_dir, seed, log);
    }
    say(log, "[" + label + "] seed " + std::to_string(seed) + ": content R2 " +
                 fixed(res->r2_content, 4) + ", style R2 " + fixed(res->r2_style, 4));
    summary.per_seed.push_back(*res);
  }

  auto collect = [&](double SeedResult::*field) {
    std::vector<double> v;
    for (const auto& s : summary.per_seed) v.push_back(s.*field);
    return aggregate(v);
  };
  summary.content = collect(&SeedResult::r2_content);
  summary.style = collect(&SeedResult::r2_style);
  summary.content_linear = collect(&SeedResult::r2_content_linear);
  summary.style_linear = collect(&SeedResult::r2_style_linear);

  const auto& g = cfg.generative;
  std::ostringstream prefix;
  prefix << summary.config_hash << ',' << io::format_double(g.p_change) << ',' << bool_text(g.stat_dep)
         << ',' << bool_text(g.causal_dep) << ',' << cfg.train.n_enc << ',';
  std::ostringstream csv;
  csv << "config_hash,p_change,stat_dep,causal_dep,n_enc,seed,r2_content,r2_style,"
         "r2_content_linear,r2_style_linear\n";
  for (const auto& s : summary.per_seed) {
    csv << prefix.str() << s.seed << ',' << io::format_double(s.r2_content) << ','
        << io::format_double(s.r2_style) << ',' << io::format_double(s.r2_content_linear) << ','
        << io::format_double(s.r2_style_linear) << '\n';
  }
  for (const auto& [name, pick] :
       {std::pair<const char*, double Aggregate::*>{"mean", &Aggregate::mean},
        std::pair<const char*, double Aggregate::*>{"std", &Aggregate::std}}) {
    csv << prefix.str() << name << ',' << io::format_double(summary.content.*pick)
        << ',' << io::format_double(summary.style.*pick) << ','
        << io::format_double(summary.content_linear.*pick) << ','
        << io::format_double(summary.style_linear.*pick) << '\n';
  }
  io::write_file_atomic(run_dir / "results.csv", csv.str());
  return summary;
}

std::vector<TableRow> table_rows() {
  return {{1.0, false, false, "p1.00_indep"},
          {0.75, false, false, "p0.75_indep"},
          {0.75, true, false, "p0.75_stat"},
          {0.75, true, true, "p0.75_stat_caus"}};
}

std::string table_csv(const std::vector<RunSummary>& rows) {
  std::ostringstream csv;
  csv << "label,config_hash,seeds,p_change,stat_dep,causal_dep,content_mean,content_std,"
         "style_mean,style_std,content_linear_mean,content_linear_std,style_linear_mean,"
         "style_linear_std\n";
  for (const auto& r : rows) {
    std::string seeds;
    for (std::size_t i = 0; i < r.per_seed.size(); ++i) {
      seeds += (i ? ";" : "") + std::to_string(r.per_seed[i].seed);
    }
    csv << r.label << ',' << r.config_hash << ',' << seeds << ','
        << io::format_double(r.generative.p_change) << ',' << bool_text(r.generative.stat_dep)
        << ',' << bool_text(r.generative.causal_dep) << ',' << io::format_double(r.content.mean)
        << ',' << io::format_double(r.content.std) << ',' << io::format_double(r.style.mean)
        << ',' << io::format_double(r.style.std) << ','
        << io::format_double(r.content_linear.mean) << ','
        << io::format_double(r.content_linear.std) << ','
        << io::format_double(r.style_linear.mean) << ',' << io::format_double(r.style_linear.std)
        << '\n';
  }
  return csv.str();
}

std::string format_table(const std::vector<RunSummary>& rows) {
  // Check marks are multi-byte, so columns are padded by hand.
  auto pad = [](std::string s, std::size_t width, std::size_t visible) {
    return s + std::string(width > visible ? width - visible : 1, ' ');
  };
  auto mark = [](bool b) { return std::string(b ? "✓" : "✗"); };
  auto pm = [](const Aggregate& a) { return fixed(a.mean, 2) + " ± " + fixed(a.std, 2); };
  std::ostringstream out;
  out << "p(chg.)  Stat.  Cau.  Content R²    Style R²\n";
  for (const auto& r : rows) {
    out << pad(fixed(r.generative.p_change, 2), 9, 4) << pad(mark(r.generative.stat_dep), 7, 1)
        << pad(mark(r.generative.causal_dep), 6, 1) << pad(pm(r.content), 14, 11) << pm(r.style)
        << '\n';
  }
  return out.str();
}

std::vector<RunSummary> run_table(const ExperimentConfig& base, const Logger& log) {
  base.validate();
  std::vector<RunSummary> rows;
  for (const auto& row : table_rows()) {
    auto cfg = base;
    cfg.generative.p_change = row.p_change;
    cfg.generative.stat_dep = row.stat_dep;
    cfg.generative.causal_dep = row.causal_dep;
    rows.push_back(run_single(cfg, row.label, log));
  }
  io::write_file_atomic(base.out_dir / "table.csv", table_csv(rows));
  io::write_file_atomic(base.out_dir / "table.txt", format_table(rows));
  return rows;
}

std::string sweep_svg(const std::vector<RunSummary>& rows) {
  constexpr double W = 480, H = 320, L = 60, R = 20, T = 30, B = 50;
  std::size_t lo = rows.empty() ? 0 : rows.front().n_enc, hi = lo;
  for (const auto& r : rows) {
    lo = std::min(lo, r.n_enc);
    hi = std::max(hi, r.n_enc);
  }
  const double span = hi > lo ? static_cast<double>(hi - lo) : 1.0;
  auto px = [&](std::size_t n) {
    return L + (W - L - R) * (hi > lo ? static_cast<double>(n - lo) / span : 0.5);
  };
  // R2 can be slightly negative; the axis covers [-0.1, 1].
  auto py = [&](double r2) { return T + (H - T - B) * (1.0 - (std::clamp(r2, -0.1, 1.0) + 0.1) / 1.1); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  if (!rows.empty()) svg << "<!-- config_hash(n_enc=" << rows.front().n_enc << ")=" << rows.front().config_hash << " -->\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    svg << "<line x1=\"" << L - 4 << "\" y1=\"" << py(tick) << "\" x2=\"" << W - R << "\" y2=\""
        << py(tick) << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << L - 8 << "\" y=\"" << py(tick) + 4 << "\" text-anchor=\"end\">"
        << fixed(tick, 2) << "</text>\n";
  }
  for (const auto& r : rows) {
    svg << "<text x=\"" << px(r.n_enc) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
        << r.n_enc << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\">encoder output dimension</text>\n";
  svg << "<text x=\"15\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 15 "
      << (T + H - B) / 2 << ")\" text-anchor=\"middle\">R²</text>\n";

  auto series = [&](const char* colour, const char* name, const Aggregate RunSummary::*field,
                    double legend_y) {
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (const auto& r : rows) svg << px(r.n_enc) << ',' << py((r.*field).mean) << ' ';
    svg << "\"/>\n";
    for (const auto& r : rows) {
      svg << "<circle cx=\"" << px(r.n_enc) << "\" cy=\"" << py((r.*field).mean)
          << "\" r=\"3.5\" fill=\"" << colour << "\"/>\n";
    }
    svg << "<line x1=\"" << W - R - 90 << "\" y1=\"" << legend_y << "\" x2=\"" << W - R - 70
        << "\" y2=\"" << legend_y << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << W - R - 64 << "\" y=\"" << legend_y + 4 << "\">" << name << "</text>\n";
  };
  series("#1f77b4", "content", &RunSummary::content, T + 10);
  series("#ff7f0e", "style", &RunSummary::style, T + 28);
  svg << "</svg>\n";
  return svg.str();
}

std::vector<RunSummary> run_dim_sweep(const ExperimentConfig& cfg,
                                      const std::vector<std::size_t>& dims, const Logger& log) {
  if (dims.empty()) throw std::invalid_argument("run_dim_sweep: no dimensions given");
  cfg.validate();
  std::vector<RunSummary> rows;
  for (std::size_t d : dims) {
    auto run = cfg;
    run.train.n_enc = d;
    rows.push_back(run_single(run, "dim_n" + std::to_string(d), log));
  }
  std::ostringstream csv;
  csv << "n_enc,config_hash,r2_content,r2_content_std,r2_style,r2_style_std\n";
  for (const auto& r : rows) {
    csv << r.n_enc << ',' << r.config_hash << ',' << io::format_double(r.content.mean) << ','
        << io::format_double(r.content.std) << ',' << io::format_double(r.style.mean) << ','
        << io::format_double(r.style.std) << '\n';
  }
  io::write_file_atomic(cfg.out_dir / "dim_sweep.csv", csv.str());
  io::write_file_atomic(cfg.out_dir / "dim_sweep.svg", sweep_svg(rows));
  return rows;
}

void run_c3di(std::size_t count, const std::optional<c3di::LTSpec>& spec, std::uint64_t seed,
              const fs::path& path) {
  numcore::RngStream root(seed);
  auto scene_rng = root.split();
  auto view_rng = root.split();
  std::vector<c3di::C3DILatentScene> scenes;
  scenes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) scenes.push_back(c3di::sample_scene(scene_rng));
  nlohmann::json meta{{"seed", seed}, {"count", count}, {"file", path.filename().string()}};
  if (spec) {
    std::vector<c3di::C3DILatentScene> views;
    views.reserve(count);
    for (const auto& s : scenes) views.push_back(c3di::sample_lt_view(s, *spec, view_rng));
    c3di::export_scene_pairs(scenes, views, path);
    meta["change_set"] = spec->to_string();
    meta["sigma"] = spec->sigma;
  } else {
    c3di::export_scenes(scenes, path);
  }
  io::write_file_atomic(fs::path(path.string() + ".meta.json"), meta.dump(2));
}

}  // namespace blockid::experiment
