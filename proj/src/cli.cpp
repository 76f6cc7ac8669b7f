#include "qcontract/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "qcontract/engine.hpp"
#include "qcontract/mimo.hpp"
#include "qcontract/ticoq.hpp"
#include "qcontract/tvcoq.hpp"

namespace qcontract::cli {

using nlohmann::json;

Format format_from_string(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("--format must be csv or json");
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("--seed-list: '" + tok + "' is not a nonnegative integer");
    }
  }
  if (out.empty()) throw ConfigError("--seed-list is empty");
  return out;
}

std::vector<int> uniform_equal_bits(std::size_t n, int L) {
  if (n == 0 || L < 0) throw std::invalid_argument("uniform_equal_bits: need n > 0 and L >= 0");
  std::vector<int> bits(n, L / static_cast<int>(n));
  for (int i = 0; i < L % static_cast<int>(n); ++i) ++bits[i];
  return bits;
}

namespace {

const json& need(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError("missing field '" + where + key + "'");
  return j.at(key);
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  const json& v = need(j, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + where + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

void check_schema(const json& cfg) {
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  if (get<int>(cfg, "schema", "") != kSchemaVersion) throw ConfigError("field 'schema' must be 1");
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Problems: a synthetic affine contraction or the MIMO game.

struct Problem {
  bool is_mimo = false;
  BlockPartition part;
  NormSpec spec;
  BoxDomain box;
  std::unique_ptr<mimo::Game> game;
  std::unique_ptr<BlockMapping> map;
  double alpha = 0.0;          // modulus used for bounds
  bool certified = false;      // alpha < 1
  double design_alpha = 0.0;   // modulus handed to the time-varying design
  Vector x_star;
  Vector x0;
  std::string note;
};

Problem build_problem(const json& pj, std::uint64_t seed, const std::string& start_default) {
  Problem pr;
  const std::string kind = get<std::string>(pj, "kind", "problem.");
  const std::string start = get_or<std::string>(pj, "start", start_default, "problem.");
  if (kind == "affine") {
    try {
      std::tie(pr.part, pr.spec) = norm_from_json(need(pj, "norm", "problem."));
      pr.box = box_from_json(need(pj, "box", "problem."));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("problem.norm/box: ") + e.what());
    }
    if (pr.box.dim() != pr.part.dim()) throw ConfigError("problem.box does not match problem.norm.blocks");
    pr.alpha = get<double>(pj, "alpha", "problem.");
    if (!(pr.alpha >= 0.0 && pr.alpha < 1.0)) throw ConfigError("field 'problem.alpha' must lie in [0, 1)");
    pr.certified = true;
    pr.map = std::make_unique<AffineMapping>(random_affine_contraction(pr.part, pr.spec, pr.box, pr.alpha, seed));
  } else if (kind == "mimo") {
    json g = need(pj, "game", "problem.");
    g["seed"] = seed;
    try {
      pr.game = std::make_unique<mimo::Game>(mimo::GameConfig::from_json(g));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("problem.game: ") + e.what());
    }
    pr.is_mimo = true;
    pr.part = mimo::game_partition(*pr.game);
    pr.spec = NormSpec::uniform_lp(pr.part, 2.0);
    pr.box = mimo::game_box(*pr.game);
    if (pj.contains("alpha")) {
      pr.alpha = get<double>(pj, "alpha", "problem.");
    } else {
      const auto est = mimo::estimate_modulus(*pr.game, get_or<std::size_t>(pj, "modulus_samples", 200, "problem."));
      pr.alpha = est.alpha_hat;
    }
    pr.certified = pr.alpha >= 0.0 && pr.alpha < 1.0;
    if (!pr.certified) pr.note = "estimated modulus " + num(pr.alpha) + " >= 1: bounds are not certified";
    pr.map = std::make_unique<mimo::MimoMapping>(*pr.game, pr.alpha);
  } else {
    throw ConfigError("field 'problem.kind' must be affine or mimo");
  }
  pr.design_alpha = pr.certified && pr.alpha > 0.0 ? pr.alpha : get_or<double>(pj, "alpha_fallback", 0.9, "problem.");

  const Vector guess =
      pr.is_mimo ? mimo::vectorize_profile(mimo::equal_power_profile(*pr.game)) : Vector(pr.part.dim(), 0.0);
  Vector mid(pr.part.dim());
  for (std::size_t m = 0; m < mid.size(); ++m) mid[m] = 0.5 * (pr.box[m].lo + pr.box[m].hi);
  const auto fp = reference_fixed_point(*pr.map, pr.is_mimo ? guess : mid);
  pr.x_star = fp.x;
  if (!fp.converged) pr.note += (pr.note.empty() ? "" : "; ") + std::string("reference fixed point did not converge");

  if (pj.contains("x0") && pj.at("x0").is_array()) {
    pr.x0 = get<Vector>(pj, "x0", "problem.");
    if (pr.x0.size() != pr.part.dim()) throw ConfigError("field 'problem.x0' has the wrong length");
  } else if (start == "fixed-point") {
    pr.x0 = pr.x_star;
  } else if (start == "random") {
    if (pr.is_mimo) {
      pr.x0 = guess;
    } else {
      std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
      pr.x0.resize(pr.part.dim());
      for (std::size_t m = 0; m < pr.x0.size(); ++m)
        pr.x0[m] = std::uniform_real_distribution<double>(pr.box[m].lo, pr.box[m].hi)(rng);
    }
  } else {
    throw ConfigError("field 'problem.start' must be random or fixed-point");
  }
  return pr;
}

DesignCase default_case(const Problem& pr) {
  if (pr.is_mimo) return DesignCase::VqLattice;
  return std::holds_alternative<WeightedMax>(pr.spec.per_block.front()) ? DesignCase::SqWmax : DesignCase::SqLp;
}

DesignCase case_of(const json& q, const Problem& pr, const std::string& where) {
  if (!q.contains("case")) return default_case(pr);
  try {
    return design_case_from_string(get<std::string>(q, "case", where));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("field '" + where + "case': " + e.what());
  }
}

struct Quantizers {
  QuantizerSchedule banks;
  std::string strategy;
  bool out_of_regime = false;
  double e_bar = 0.0;  // worst-case ||e||_block of a time-invariant bank
  double eta = 0.0;
};

Quantizers build_quantizers(const std::string& strategy, const json& q, const Problem& pr, int L, std::size_t T) {
  Quantizers out;
  out.strategy = strategy;
  if (strategy == "none") return out;
  if (L < 0) throw ConfigError("field 'quantizer.L' must be nonnegative");
  try {
    if (strategy == "uniform-equal") {
      out.banks.push_back(QuantizerBank::scalar(pr.part, pr.box, uniform_equal_bits(pr.part.dim(), L)));
    } else if (strategy == "ticoq") {
      const auto d = ticoq_design(case_of(q, pr, "quantizer."), pr.part, pr.spec, pr.box, L);
      out.banks.push_back(make_bank(d, pr.part, pr.box));
      out.eta = d.eta;
    } else if (strategy == "tvcoq") {
      const auto s = tvcoq_design(case_of(q, pr, "quantizer."), pr.part, pr.spec, pr.box, L, T, pr.design_alpha);
      out.banks = schedule_banks(s, pr.part, pr.box);
      out.out_of_regime = !s.in_regime;
      out.eta = s.eta;
    } else {
      throw ConfigError("field 'quantizer.strategy' must be none, uniform-equal, ticoq or tvcoq");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("quantizer: ") + e.what());
  }
  if (out.banks.size() == 1) out.e_bar = out.banks.front().worst_case_norm(pr.spec);
  return out;
}

struct Run {
  Trajectory traj;
  Vector throughput;
  Vector bound;
  std::vector<bool> cert;
};

Run run_once(const Problem& pr, const Quantizers& q, const std::string& scheme_name, std::size_t T) {
  Run r;
  const bool sequential = scheme_name == "sequential";
  if (sequential && !pr.is_mimo) throw ConfigError("scheme 'sequential' applies to the mimo problem only");
  Scheme scheme = Scheme::Jacobi;
  if (!sequential) {
    try {
      scheme = scheme_from_string(scheme_name == "simultaneous" ? "jacobi" : scheme_name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("field 'scheme': ") + e.what());
    }
    if (scheme == Scheme::AsyncBoundOnly) throw ConfigError("field 'scheme': the asynchronous scheme has no simulator");
  }
  if (pr.is_mimo) {
    const auto start = mimo::devectorize_profile(pr.x0, pr.game->K(), pr.game->N());
    auto res = mimo::iwfa_run(*pr.game, q.banks,
                              sequential ? mimo::IwfaMode::Sequential : mimo::IwfaMode::Simultaneous, T, pr.x_star,
                              &start);
    if (scheme == Scheme::GaussSeidel) {
      RunOptions opts{scheme, &pr.spec, pr.x_star};
      res.traj = run_iteration(*pr.map, q.banks, pr.x0, T, opts);
      res.sum_throughput.clear();
      for (const auto& x : res.traj.iterates)
        res.sum_throughput.push_back(
            mimo::sum_throughput(*pr.game, mimo::devectorize_profile(x, pr.game->K(), pr.game->N())));
    }
    r.traj = std::move(res.traj);
    r.throughput = std::move(res.sum_throughput);
  } else {
    RunOptions opts{scheme, &pr.spec, pr.x_star};
    r.traj = run_iteration(*pr.map, q.banks, pr.x0, T, opts);
  }
  if (pr.certified && !sequential) {
    r.bound = trajectory_bound(r.traj, pr.alpha, scheme, pr.part.num_blocks());
    r.cert = bound_certificate(r.traj, pr.x_star, pr.alpha, scheme, pr.part, pr.spec);
  }
  return r;
}

std::vector<std::uint64_t> seeds_of(const json& cfg, const std::optional<std::vector<std::uint64_t>>& override) {
  if (override) return *override;
  if (cfg.contains("seeds")) {
    auto s = get<std::vector<std::uint64_t>>(cfg, "seeds", "");
    if (s.empty()) throw ConfigError("field 'seeds' is empty");
    return s;
  }
  return {get_or<std::uint64_t>(cfg, "seed", 1, "")};
}

CommandResult guarded(const std::function<CommandResult()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    return {kConfigError, "", e.what()};
  } catch (const json::exception& e) {
    return {kConfigError, "", std::string("config: ") + e.what()};
  }
}

}  // namespace

// ---------------------------------------------------------------------------

CommandResult cmd_design(const json& cfg, Format fmt) {
  return guarded([&]() -> CommandResult {
    check_schema(cfg);
    const std::string design = get<std::string>(cfg, "design", "");
    const int L = get<int>(cfg, "L", "");
    if (L < 0) throw ConfigError("field 'L' must be nonnegative");
    json out{{"schema", kSchemaVersion}, {"design", design}};
    int code = kOk;
    std::string msg;

    auto norm_and_box = [&]() {
      try {
        auto [part, spec] = norm_from_json(need(cfg, "norm", ""));
        BoxDomain box = box_from_json(need(cfg, "box", ""));
        if (box.dim() != part.dim()) throw ConfigError("field 'box' does not match 'norm.blocks'");
        return std::make_tuple(part, spec, box);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(std::string("norm/box: ") + e.what());
      }
    };

    if (design == "tvcoq") {
      const double alpha = get<double>(cfg, "alpha", "");
      const std::size_t T = get<std::size_t>(cfg, "T", "");
      if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("field 'alpha' must lie in (0, 1)");
      if (T == 0) throw ConfigError("field 'T' must be positive");
      StageSchedule s;
      if (cfg.contains("norm")) {
        auto [part, spec, box] = norm_and_box();
        DesignCase kind;
        try {
          kind = design_case_from_string(get_or<std::string>(cfg, "stage_design", "ticoq-wmax", ""));
          s = tvcoq_design(kind, part, spec, box, L, T, alpha);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        out["error_bound"] = tvcoq_error_bound(alpha, part.dim(), L, T, s.eta);
      } else {
        const std::size_t n = get<std::size_t>(cfg, "n", "");
        if (n == 0) throw ConfigError("field 'n' must be positive");
        s = tvcoq_master(alpha, n, L, T, get_or<double>(cfg, "L_prime", 0.0, ""));
      }
      out.update(schedule_to_json(s));
      if (!s.in_regime) {
        code = kOutOfRegime;
        msg = "outside theorem regime: L must be at least " + num(s.required_L) + "; greedy schedule reported";
        out["flag"] = "outside theorem regime";
      }
    } else {
      DesignCase kind;
      try {
        kind = design_case_from_string(design);
      } catch (const std::invalid_argument&) {
        throw ConfigError("field 'design' must be ticoq-wmax, ticoq-lp, ticoq-vq or tvcoq");
      }
      auto [part, spec, box] = norm_and_box();
      TicoqDesign d;
      try {
        d = ticoq_design(kind, part, spec, box, L);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      out.update(design_to_json(d));
      if (kind == DesignCase::SqLp) {
        const auto r = lp_kkt_residuals(d, part);
        out["kkt_residual"] = r.slackness;
      }
    }
    if (fmt == Format::Json) return {code, out.dump(2) + "\n", msg};
    // Flat key,value listing for the CSV form.
    std::ostringstream os;
    os << "key,value\n";
    for (auto it = out.begin(); it != out.end(); ++it) os << it.key() << ",\"" << it.value().dump() << "\"\n";
    return {code, os.str(), msg};
  });
}

CommandResult cmd_simulate(const json& cfg, const std::optional<std::vector<std::uint64_t>>& seed_override,
                           Format fmt) {
  return guarded([&]() -> CommandResult {
    check_schema(cfg);
    const json& pj = need(cfg, "problem", "");
    const std::size_t T = get<std::size_t>(cfg, "T", "");
    if (T == 0) throw ConfigError("field 'T' must be positive");
    const std::string scheme = get_or<std::string>(cfg, "scheme", "jacobi", "");
    const json q = cfg.contains("quantizer") ? cfg.at("quantizer") : json::object();
    const std::string strategy = get_or<std::string>(q, "strategy", "none", "quantizer.");
    const int L = strategy == "none" ? 0 : get<int>(q, "L", "quantizer.");

    int code = kOk;
    std::string msg;
    std::ostringstream csv;
    csv << "seed,t,sum_throughput,dist,err_norm,bound,certificate\n";
    json runs = json::array();
    for (std::uint64_t seed : seeds_of(cfg, seed_override)) {
      const Problem pr = build_problem(pj, seed, "random");
      const Quantizers qz = build_quantizers(strategy, q, pr, L, T);
      if (qz.out_of_regime) {
        code = kOutOfRegime;
        msg = "tvcoq schedule is outside the theorem regime";
      }
      if (!pr.note.empty()) msg += (msg.empty() ? "" : "; ") + ("seed " + std::to_string(seed) + ": " + pr.note);
      const Run r = run_once(pr, qz, scheme, T);
      json rows = json::array();
      for (std::size_t t = 0; t < r.traj.iterates.size(); ++t) {
        csv << seed << ',' << t << ',';
        if (!r.throughput.empty()) csv << num(r.throughput[t]);
        csv << ',' << num(r.traj.distances[t]) << ',';
        if (t < r.traj.error_norms.size()) csv << num(r.traj.error_norms[t]);
        csv << ',';
        if (!r.bound.empty()) csv << num(r.bound[t]);
        csv << ',';
        if (!r.cert.empty()) csv << (r.cert[t] ? 1 : 0);
        csv << '\n';
        json row{{"t", t}, {"dist", r.traj.distances[t]}};
        if (!r.throughput.empty()) row["sum_throughput"] = r.throughput[t];
        if (t < r.traj.error_norms.size()) row["err_norm"] = r.traj.error_norms[t];
        if (!r.bound.empty()) row["bound"] = r.bound[t];
        if (!r.cert.empty()) row["certificate"] = static_cast<bool>(r.cert[t]);
        rows.push_back(std::move(row));
      }
      runs.push_back({{"seed", seed}, {"alpha", pr.alpha}, {"certified", pr.certified}, {"rows", std::move(rows)}});
    }
    if (fmt == Format::Json) return {code, json{{"schema", kSchemaVersion}, {"runs", runs}}.dump(2) + "\n", msg};
    return {code, csv.str(), msg};
  });
}

CommandResult cmd_tradeoff(const json& cfg, const std::optional<std::vector<std::uint64_t>>& seed_override,
                           Format fmt) {
  return guarded([&]() -> CommandResult {
    check_schema(cfg);
    const json& pj = need(cfg, "problem", "");
    const json& sw = need(cfg, "sweep", "");
    const std::string over = get<std::string>(sw, "kind", "sweep.");
    const auto values = get<std::vector<int>>(sw, "values", "sweep.");
    if (values.empty()) throw ConfigError("field 'sweep.values' is empty");
    if (over != "L" && over != "T") throw ConfigError("field 'sweep.kind' must be L or T");
    const json q = cfg.contains("quantizer") ? cfg.at("quantizer") : json::object();
    const std::string strategy = get_or<std::string>(q, "strategy", over == "L" ? "ticoq" : "tvcoq", "quantizer.");
    if (strategy == "none") throw ConfigError("field 'quantizer.strategy': a tradeoff needs a quantizer");
    const std::string scheme = get_or<std::string>(cfg, "scheme", "jacobi", "");
    const auto seeds = seeds_of(cfg, seed_override);

    int code = kOk;
    std::string msg;
    struct Row {
      int value;
      double measured, bound;
    };
    std::vector<Row> rows;
    for (int v : values) {
      if (v < (over == "T" ? 1 : 0)) throw ConfigError("field 'sweep.values' has an out-of-range entry");
      const std::size_t T = over == "T" ? static_cast<std::size_t>(v) : get_or<std::size_t>(cfg, "T", 100, "");
      const int L = over == "L" ? v : get<int>(q, "L", "quantizer.");
      const std::size_t tail = over == "L" ? get_or<std::size_t>(cfg, "tail", std::max<std::size_t>(1, T / 2), "") : 1;
      if (tail == 0 || tail > T) throw ConfigError("field 'tail' must lie in [1, T]");
      double measured = 0.0, bound = 0.0;
      for (std::uint64_t seed : seeds) {
        const Problem pr = build_problem(pj, seed, over == "T" ? "fixed-point" : "random");
        if (!pr.certified) throw ConfigError("tradeoff needs a certified modulus (alpha < 1); set problem.alpha");
        const Quantizers qz = build_quantizers(strategy, q, pr, L, T);
        if (qz.out_of_regime) {
          code = kOutOfRegime;
          msg = "tvcoq schedule is outside the theorem regime for some sweep points";
        }
        const Run r = run_once(pr, qz, scheme, T);
        const auto& d = r.traj.distances;
        double m = 0.0;
        for (std::size_t t = T + 1 - tail; t <= T; ++t) m += d[t];
        measured += m / static_cast<double>(tail);
        const std::size_t K = pr.part.num_blocks();
        const Scheme sch = scheme_from_string(scheme == "simultaneous" || scheme == "sequential" ? "jacobi" : scheme);
        const double transient = std::pow(pr.alpha, static_cast<double>(T)) * d.front();
        if (strategy == "tvcoq")
          bound += transient + tvcoq_error_bound(pr.design_alpha, pr.part.dim(), L, T, qz.eta);
        else if (over == "L")
          bound += worst_case_error_bound(pr.alpha, qz.e_bar, std::nullopt, sch, K);
        else
          bound += transient + worst_case_error_bound(pr.alpha, qz.e_bar, T, sch, K);
      }
      rows.push_back({v, measured / seeds.size(), bound / seeds.size()});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.value < b.value; });

    std::optional<double> slope;
    if (over == "L" && rows.size() >= 2) {
      double mx = 0.0, my = 0.0;
      for (const auto& r : rows) mx += r.value, my += std::log2(r.measured);
      mx /= rows.size();
      my /= rows.size();
      double sxy = 0.0, sxx = 0.0;
      for (const auto& r : rows) {
        sxy += (r.value - mx) * (std::log2(r.measured) - my);
        sxx += (r.value - mx) * (r.value - mx);
      }
      if (sxx > 0.0) slope = sxy / sxx;
    }
    if (fmt == Format::Json) {
      json out{{"schema", kSchemaVersion}, {"sweep", over}, {"rows", json::array()}};
      for (const auto& r : rows) out["rows"].push_back({{"value", r.value}, {"measured", r.measured}, {"bound", r.bound}});
      if (slope) out["fitted_log2_slope"] = *slope;
      return {code, out.dump(2) + "\n", msg};
    }
    std::ostringstream os;
    os << over << ",measured,bound" << (slope ? ",fitted_log2_slope" : "") << '\n';
    for (const auto& r : rows) {
      os << r.value << ',' << num(r.measured) << ',' << num(r.bound);
      if (slope) os << ',' << num(*slope);
      os << '\n';
    }
    return {code, os.str(), msg};
  });
}

}  // namespace qcontract::cli
