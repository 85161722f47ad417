#include "gwbp/cli.hpp"

#include "gwbp/error.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace gwbp::cli {

std::vector<double> Grid::values() const {
  std::vector<double> v;
  if (stop < start) return v;
  auto count = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (std::int64_t i = 0; i < count; ++i) v.push_back(start + static_cast<double>(i) * step);
  return v;
}

Grid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw_parse("grid must look like start:stop:step, got '" + text + "'");
  Grid g{parse_number(parts[0]).value, parse_number(parts[1]).value, parse_number(parts[2]).value};
  if (!(g.step > 0.0) || !std::isfinite(g.start) || !std::isfinite(g.stop)) {
    throw_parse("grid step must be positive and bounds finite in '" + text + "'");
  }
  if (g.values().size() > 10000000) throw_parse("grid '" + text + "' has too many points");
  return g;
}

std::int64_t default_budget() {
  if (const char* env = std::getenv("GWBP_BUDGET")) {
    char* end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 10000000;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

Json real(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::filesystem::path path(cfg.out);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw_precondition("cannot write output file '" + cfg.out + "'");
    f << text;
    if (!f) throw_precondition("cannot write output file '" + cfg.out + "'");
  }
  std::filesystem::rename(tmp, path);
}

void require_format(const RunConfig& cfg) {
  if (cfg.format != "json" && cfg.format != "csv" && cfg.format != "table") {
    throw_parse("format must be json, csv or table");
  }
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + csv_field(header[i]);
    s += "\n";
    for (auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + csv_field(row[i]);
      s += "\n";
    }
    return s;
  }

  std::string text() const {
    std::vector<std::size_t> w(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) w[i] = header[i].size();
    for (auto& row : rows)
      for (std::size_t i = 0; i < row.size(); ++i) w[i] = std::max(w[i], row[i].size());
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        os << (i ? "  " : "") << std::left << std::setw(static_cast<int>(w[i])) << cells[i];
      }
      os << "\n";
    };
    line(header);
    for (auto& row : rows) line(row);
    return os.str();
  }

  Json json() const {
    Json arr = Json::array();
    for (auto& row : rows) {
      Json obj = Json::object();
      for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = row[i];
      arr.push_back(obj);
    }
    return arr;
  }
};

std::string key_value_text(const Json& obj) {
  Table t;
  t.header = {"field", "value"};
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    std::string v;
    if (it.value().is_string()) {
      v = it.value().get<std::string>();
    } else if (it.value().is_number_float()) {
      v = format_real(it.value().get<double>());
    } else {
      v = it.value().dump();
    }
    t.rows.push_back({it.key(), v});
  }
  return t.text();
}

std::string flat_csv(const Json& obj) {
  Table t;
  std::vector<std::string> row;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    t.header.push_back(it.key());
    if (it.value().is_string()) {
      row.push_back(it.value().get<std::string>());
    } else if (it.value().is_number_float()) {
      row.push_back(format_real(it.value().get<double>()));
    } else if (it.value().is_null()) {
      row.push_back("nan");
    } else {
      row.push_back(it.value().dump());
    }
  }
  t.rows.push_back(row);
  return t.csv();
}

std::string render(const RunConfig& cfg, const Json& obj) {
  if (cfg.format == "json") return obj.dump(2) + "\n";
  if (cfg.format == "csv") return flat_csv(obj);
  return key_value_text(obj);
}

OffspringDistribution load(const std::string& text) {
  if (text.empty()) throw_parse("--dist is required");
  return make_distribution(parse_distribution_spec(text));
}

std::uint64_t resolve_seed(const RunConfig& cfg, std::ostream& err) {
  if (cfg.seed) return *cfg.seed;
  std::random_device rd;
  std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "seed: " << s << "\n";
  return s;
}

void warn_budget(const OffspringDistribution& d, int n, std::int64_t budget, std::ostream& err) {
  Moment m = mean(d);
  double expected = m.infinite ? INFINITY : std::pow(m.value, n);
  if (expected > budget / 2.0) {
    err << "warning: expected tree size mean^n = " << format_real(expected)
        << " exceeds half the node budget " << budget << "; some replicates may be truncated\n";
  }
}

double exact_qn(const OffspringDistribution& d, int r, double p, int n) {
  return q_iterate(d, r, p, n).q.back();
}

Json simulate_json(const std::string& spec, const RunConfig& cfg, double p, const SimEstimate& est,
                   double q_exact) {
  double z;
  if (est.standard_error > 0.0) {
    z = (est.estimate - q_exact) / est.standard_error;
  } else {
    z = std::abs(est.estimate - q_exact) <= 1e-12 ? 0.0 : NAN;
  }
  Json j = Json::object();
  j["spec"] = spec;
  j["r"] = cfg.r;
  j["p"] = p;
  j["n"] = cfg.n;
  j["N"] = cfg.reps;
  j["seed"] = est.seed;
  j["qhat"] = real(est.estimate);
  j["se"] = real(est.standard_error);
  j["q_exact"] = real(q_exact);
  j["z"] = real(z);
  j["replicates"] = est.replicates;
  j["truncated"] = est.truncated;
  return j;
}

}  // namespace

Json critical_json(const std::string& spec, int r, const CriticalResult& c) {
  Json j = Json::object();
  j["pc"] = real(c.pc);
  j["x_star"] = real(c.x_star);
  j["M"] = real(c.M);
  j["method"] = method_name(c.method);
  j["err"] = real(c.error);
  j["spec"] = spec;
  j["r"] = r;
  return j;
}

Json bounds_json(const BoundsReport& rep) {
  Json j = Json::object();
  j["spec"] = rep.spec;
  j["r"] = rep.r;
  j["pc"] = rep.reference ? real(rep.reference->pc) : Json(nullptr);
  j["pc_err"] = rep.reference ? real(rep.reference->error) : Json(nullptr);
  Json arr = Json::array();
  for (auto& e : rep.entries) {
    Json b = Json::object();
    b["name"] = e.name;
    b["kind"] = e.kind == BoundKind::lower ? "lower" : "upper";
    b["value"] = real(e.value);
    b["raw"] = real(e.raw);
    b["valid"] = e.valid;
    b["vacuous"] = e.vacuous;
    b["source"] = e.source;
    arr.push_back(b);
  }
  j["bounds"] = arr;
  Json v = Json::array();
  for (auto& name : rep.violations()) v.push_back(name);
  j["violations"] = v;
  return j;
}

int cmd_pc(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require_format(cfg);
  OffspringDistribution d = load(cfg.dist);
  CriticalResult c = pc_exact(d, cfg.r);
  Json j = critical_json(d.spec().to_string(), cfg.r, c);
  auto cf = pc_closed_form(d.spec(), cfg.r);
  j["closed_form"] = cf ? real(cf->pc) : Json(nullptr);
  emit(cfg, render(cfg, j), out);
  return kOk;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_format(cfg);
  OffspringDistribution d = load(cfg.dist);
  BoundsReport rep = bounds_report(d, cfg.r);
  Json j = bounds_json(rep);
  std::string text;
  if (cfg.format == "json") {
    text = j.dump(2) + "\n";
  } else {
    Table t;
    t.header = {"name", "kind", "value", "raw", "valid", "vacuous", "source"};
    for (auto& e : rep.entries) {
      t.rows.push_back({e.name, e.kind == BoundKind::lower ? "lower" : "upper", format_real(e.value),
                        format_real(e.raw), e.valid ? "true" : "false", e.vacuous ? "true" : "false",
                        e.source});
    }
    t.rows.push_back({"pc_exact", "reference", format_real(rep.reference->pc), format_real(rep.reference->pc),
                      "true", "false", method_name(rep.reference->method)});
    text = cfg.format == "csv" ? t.csv() : t.text();
  }
  emit(cfg, text, out);
  auto bad = rep.violations();
  if (!bad.empty()) {
    for (auto& name : bad) err << "error: bound " << name << " contradicts pc_exact\n";
    return kSandwichViolation;
  }
  return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_format(cfg);
  if (!cfg.p) throw_parse("--p is required for simulate");
  OffspringDistribution d = load(cfg.dist);
  std::uint64_t seed = resolve_seed(cfg, err);
  warn_budget(d, cfg.n, cfg.budget, err);
  SimEstimate est = estimate_qn(d, cfg.r, *cfg.p, cfg.n, cfg.reps, seed, {cfg.budget, cfg.workers});
  if (est.truncated > 0) err << "warning: " << est.truncated << " replicates exceeded the node budget\n";
  Json j = simulate_json(d.spec().to_string(), cfg, *cfg.p, est, exact_qn(d, cfg.r, *cfg.p, cfg.n));
  emit(cfg, render(cfg, j), out);
  return kOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.format == "table") {
    // Sweeps are data for plotting; table output falls back to CSV.
  } else {
    require_format(cfg);
  }
  const std::string& q = cfg.quantity;
  bool p_based = q == "qlimit" || q == "qn" || q == "estimate";
  if (!(p_based || q == "pc" || q == "bounds")) throw_parse("unknown sweep quantity '" + q + "'");
  if (p_based && !cfg.p_grid && !cfg.p) throw_parse("sweep of " + q + " needs --p-grid or --p");

  DistributionSpec base = parse_distribution_spec(cfg.dist);
  std::vector<std::optional<double>> bs;
  if (cfg.b_grid) {
    for (double b : cfg.b_grid->values()) bs.push_back(b);
  } else {
    bs.push_back(std::nullopt);
  }
  std::vector<double> ps;
  if (cfg.p_grid) {
    ps = cfg.p_grid->values();
  } else if (cfg.p) {
    ps = {*cfg.p};
  }

  Table t;
  if (q == "pc") t.header = {"spec", "r", "b", "pc", "x_star", "M", "method", "err", "pc_times_2b2", "error"};
  if (q == "qlimit") t.header = {"spec", "r", "p", "q_limit", "upper", "converged", "iterations", "error"};
  if (q == "qn") t.header = {"spec", "r", "p", "n", "q_n", "error"};
  if (q == "estimate") t.header = {"spec", "r", "p", "n", "N", "seed", "qhat", "se", "q_exact", "z", "error"};
  if (q == "bounds") t.header = {"spec", "r", "name", "kind", "value", "raw", "valid", "vacuous", "pc", "error"};
  auto blank_row = [&](const std::string& spec, const std::string& msg) {
    std::vector<std::string> row(t.header.size(), "");
    row[0] = spec;
    row[1] = std::to_string(cfg.r);
    row.back() = msg;
    return row;
  };

  std::uint64_t seed = q == "estimate" ? resolve_seed(cfg, err) : 0;
  for (auto& b : bs) {
    DistributionSpec spec = base;
    std::string label = cfg.dist;
    try {
      if (b) {
        if (spec.family == Family::heavy_tail || spec.family == Family::explicit_pmf) {
          throw_precondition("family has no b parameter");
        }
        spec.b = std::floor(*b) == *b ? Number::from_int(static_cast<std::int64_t>(*b)) : Number::from_double(*b);
      }
      label = spec.to_string();
      OffspringDistribution d = make_distribution(spec);
      if (q == "pc") {
        CriticalResult c = pc_exact(d, cfg.r);
        Moment m = mean(d);
        double scaled = m.infinite ? NAN : c.pc * 2.0 * m.value * m.value;
        t.rows.push_back({label, std::to_string(cfg.r), m.infinite ? "inf" : format_real(m.value),
                          format_real(c.pc), format_real(c.x_star), format_real(c.M), method_name(c.method),
                          format_real(c.error), format_real(scaled), ""});
      } else if (q == "bounds") {
        BoundsReport rep = bounds_report(d, cfg.r);
        for (auto& e : rep.entries) {
          t.rows.push_back({label, std::to_string(cfg.r), e.name, e.kind == BoundKind::lower ? "lower" : "upper",
                            format_real(e.value), format_real(e.raw), e.valid ? "true" : "false",
                            e.vacuous ? "true" : "false", format_real(rep.reference->pc), ""});
        }
      } else {
        GEvalContext ctx(d, cfg.r);
        for (double p : ps) {
          try {
            if (q == "qlimit") {
              QLimit l = q_limit(ctx, p, cfg.tol);
              t.rows.push_back({label, std::to_string(cfg.r), format_real(p), format_real(l.estimate),
                                format_real(l.upper), l.converged ? "true" : "false",
                                std::to_string(l.iterations), ""});
            } else if (q == "qn") {
              QTrace tr = q_iterate(ctx, p, cfg.n);
              t.rows.push_back({label, std::to_string(cfg.r), format_real(p), std::to_string(cfg.n),
                                format_real(tr.q.back()), ""});
            } else {
              SimEstimate est = estimate_qn(d, cfg.r, p, cfg.n, cfg.reps, seed, {cfg.budget, cfg.workers});
              double qe = q_iterate(ctx, p, cfg.n).q.back();
              Json j = simulate_json(label, cfg, p, est, qe);
              t.rows.push_back({label, std::to_string(cfg.r), format_real(p), std::to_string(cfg.n),
                                std::to_string(cfg.reps), std::to_string(seed), format_real(est.estimate),
                                format_real(est.standard_error), format_real(qe),
                                j["z"].is_null() ? "nan" : format_real(j["z"].get<double>()), ""});
            }
          } catch (const Error& e) {
            auto row = blank_row(label, e.what());
            row[2] = format_real(p);
            t.rows.push_back(row);
          }
        }
      }
    } catch (const Error& e) {
      auto row = blank_row(label, e.what());
      if (q == "pc" && b) row[2] = format_real(*b);
      t.rows.push_back(row);
    }
  }
  emit(cfg, cfg.format == "json" ? t.json().dump(2) + "\n" : t.csv(), out);
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bootstrap percolation on Galton-Watson trees"};
  app.require_subcommand(1);
  RunConfig cfg;
  cfg.budget = default_budget();
  std::string p_grid, b_grid;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--dist", cfg.dist, "distribution spec, e.g. regular:b=5")->required();
    sub->add_option("--r", cfg.r, "bootstrap threshold r")->check(CLI::Range(2, 1000000));
    sub->add_option("--format", cfg.format, "json | csv | table");
    sub->add_option("--out", cfg.out, "write output to this file");
    sub->add_option("--seed", seed, "64-bit master seed");
  };
  auto simulation = [&](CLI::App* sub) {
    sub->add_option("--n", cfg.n, "tree depth")->check(CLI::NonNegativeNumber);
    sub->add_option("--reps", cfg.reps, "Monte Carlo replicates")->check(CLI::PositiveNumber);
    sub->add_option("--budget", cfg.budget, "node budget per replicate")->check(CLI::PositiveNumber);
    sub->add_option("--workers", cfg.workers, "worker threads (0 = all cores)");
  };

  CLI::App* pc = app.add_subcommand("pc", "critical probability");
  common(pc);
  CLI::App* bounds = app.add_subcommand("bounds", "analytic bounds on the critical probability");
  common(bounds);
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo estimate of q_n(p)");
  common(sim);
  simulation(sim);
  sim->add_option("--p", cfg.p, "initial infection probability")->required()->check(CLI::Range(0.0, 1.0));
  CLI::App* sweep = app.add_subcommand("sweep", "grid sweeps written as CSV");
  common(sweep);
  simulation(sweep);
  sweep->add_option("--quantity", cfg.quantity, "pc | bounds | qlimit | qn | estimate");
  sweep->add_option("--p", cfg.p, "single p value")->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--p-grid", p_grid, "p grid start:stop:step");
  sweep->add_option("--b-grid", b_grid, "b grid start:stop:step");
  sweep->add_option("--tol", cfg.tol, "q_limit tolerance");

  std::vector<const char*> argv;
  argv.push_back("gwbp");
  for (auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  }

  try {
    for (CLI::App* sub : app.get_subcommands()) {
      cfg.command = sub->get_name();
      if (sub->count("--seed")) cfg.seed = seed;
    }
    if (!p_grid.empty()) cfg.p_grid = parse_grid(p_grid);
    if (!b_grid.empty()) cfg.b_grid = parse_grid(b_grid);
    if (cfg.p_grid) {
      for (double p : cfg.p_grid->values()) {
        if (p < 0.0 || p > 1.0) throw_parse("p grid values must lie in [0,1]");
      }
    }
    if (cfg.command == "pc") return cmd_pc(cfg, out, err);
    if (cfg.command == "bounds") return cmd_bounds(cfg, out, err);
    if (cfg.command == "simulate") return cmd_simulate(cfg, out, err);
    return cmd_sweep(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::parse: return kParseError;
      case ErrorKind::precondition: return kPreconditionError;
      case ErrorKind::internal: return kSandwichViolation;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kFailure;
}

}  // namespace gwbp::cli
