#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "cellnet/acceptance.hpp"
#include "cellnet/dynamics.hpp"
#include "cellnet/error.hpp"
#include "cellnet/repspace.hpp"

namespace cellnet::cli {

namespace {

// ---------------------------------------------------------------------------
// Small helpers

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kInvalidInput, "cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::kInvalidInput, what + ": " + e.what());
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::kInvalidInput, what + ": not a number: '" + s + "'");
  }
}

Json labels_json(const NetworkSpec& net, const std::vector<CellIndex>& cells) {
  Json a = Json::array();
  for (auto q : cells) a.push_back(net.label(q));
  return a;
}

Json rational_rows(const QMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(to_string(m(i, j)));
    rows.push_back(std::move(r));
  }
  return rows;
}

Json float_rows(const DMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Json fit_json(const dyn::ExponentFit& f) {
  return Json{{"exponent", f.exponent}, {"intercept", f.intercept}, {"residual", f.residual}};
}

// ---------------------------------------------------------------------------
// Experiments

struct LambdaSpec {
  double from = 0.0;
  double to = 0.0;
  std::size_t points = 0;
  bool log_scale = true;
};

struct Experiment {
  std::optional<NetworkSpec> net;
  std::optional<std::pair<std::size_t, std::size_t>> ring;
  std::optional<std::string> response;
  dyn::Preset preset = dyn::Preset::kNone;
  std::optional<LambdaSpec> lambda;
  std::optional<std::uint64_t> seed;
};

Experiment parse_experiment(const Json& j) {
  require(j.is_object(), "experiment must be a JSON object");
  require(j.contains("network"), "experiment needs a \"network\"");
  Experiment e;
  const Json& nj = j.at("network");
  if (nj.is_object() && nj.contains("ring_ff")) {
    const Json& r = nj.at("ring_ff");
    require(r.is_array() && r.size() == 2 && r[0].is_number_unsigned() && r[1].is_number_unsigned(),
            "\"ring_ff\" must be [n, k] with positive integers");
    const std::size_t n = r[0].get<std::size_t>(), k = r[1].get<std::size_t>();
    require(n >= 1 && k >= 1, "\"ring_ff\" needs n, k >= 1");
    e.ring = {n, k};
    e.net = make_ring_ff(n, k);
  } else {
    e.net = parse_network(nj);
  }
  require(j.contains("response"), "experiment needs a \"response\"");
  const Json& rj = j.at("response");
  if (rj.is_string()) {
    e.response = rj.get<std::string>();
  } else {
    require(rj.is_object() && rj.contains("preset") && rj.at("preset").is_string(),
            "\"response\" must be an expression or {\"preset\": name}");
    e.preset = dyn::parse_preset(rj.at("preset").get<std::string>());
  }
  if (j.contains("lambda")) {
    const Json& l = j.at("lambda");
    require(l.is_object() && l.contains("from") && l.contains("to") && l.contains("points"),
            "\"lambda\" needs from, to and points");
    require(l.at("from").is_number() && l.at("to").is_number() && l.at("points").is_number_unsigned(),
            "\"lambda\" fields have the wrong types");
    LambdaSpec s;
    s.from = l.at("from").get<double>();
    s.to = l.at("to").get<double>();
    s.points = l.at("points").get<std::size_t>();
    const std::string scale = l.value("scale", std::string("log"));
    require(scale == "log" || scale == "linear", "\"scale\" must be log or linear");
    s.log_scale = scale == "log";
    e.lambda = s;
  }
  if (j.contains("seed")) {
    require(j.at("seed").is_number_unsigned(), "\"seed\" must be a nonnegative integer");
    e.seed = j.at("seed").get<std::uint64_t>();
  }
  return e;
}

dyn::VectorField build_field(const Experiment& e, const Monoid& m) {
  if (e.preset != dyn::Preset::kNone) return dyn::VectorField::from_preset(*e.net, m, e.preset);
  return dyn::VectorField::from_expression(*e.net, m, expr::parse(*e.response));
}

std::vector<std::string> state_columns(const NetworkSpec& net, std::size_t d) {
  std::vector<std::string> cols;
  for (const auto& c : net.cells()) {
    if (d == 1) {
      cols.push_back(c);
    } else {
      cols.push_back(c + ".re");
      cols.push_back(c + ".im");
    }
  }
  return cols;
}

// ---------------------------------------------------------------------------
// Command context

struct Context {
  std::string command;
  std::vector<std::string> args;
  std::vector<std::string> inputs;  // file contents, for the digest
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool json = false;
  bool quiet = false;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  std::string load(const std::string& path) {
    std::string text = read_file(path);
    inputs.push_back(text);
    return text;
  }

  Json report(Json result, const std::string& status) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& in : inputs) {
      h = fnv1a64(in, h);
      h = fnv1a64(std::string(1, '\0'), h);
    }
    Json r;
    r["command"] = command;
    r["args"] = args;
    r["input_digest"] = "fnv1a64:" + hex64(h);
    r["seed"] = seed;
    r["result"] = std::move(result);
    r["status"] = status;
    return r;
  }

  void emit_json(const Json& j) const {
    if (!quiet) *out << j.dump(2) << "\n";
  }
};

int status_exit(const std::string& status) {
  return status == "fail" ? kExitViolation : kExitOk;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_closure(Context& ctx, const std::string& file, std::size_t cap) {
  const NetworkSpec net = parse_network(parse_json(ctx.load(file), file));
  const Monoid m = monoid_closure(net, cap);
  Json elements = Json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& map = m.element(static_cast<ElementIndex>(i));
    std::vector<CellIndex> images(map.table().begin(), map.table().end());
    elements.push_back({{"index", i}, {"word", m.word_string(static_cast<ElementIndex>(i))},
                        {"map", labels_json(net, images)}});
  }
  Json cayley = nullptr;
  if (m.has_cayley()) {
    cayley = Json::array();
    const auto& t = m.cayley();
    for (std::size_t i = 0; i < t.n; ++i) {
      Json row = Json::array();
      for (std::size_t j = 0; j < t.n; ++j) row.push_back(t.at(i, j));
      cayley.push_back(std::move(row));
    }
  }
  Json result;
  result["size"] = m.size();
  result["degree"] = m.degree();
  result["generators"] = m.generator_names();
  result["elements"] = std::move(elements);
  result["cayley"] = std::move(cayley);
  result["fully_dependent"] = labels_json(net, fully_dependent_cells(net, m));
  ctx.emit_json(ctx.report(std::move(result), "ok"));
  return kExitOk;
}

int cmd_fundamental(Context& ctx, const std::string& file) {
  const NetworkSpec net = parse_network(parse_json(ctx.load(file), file));
  const Monoid m = monoid_closure(net);
  const NetworkSpec fund = fundamental_network(m);
  const Monoid fm = monoid_closure(fund);
  const auto dependent = fully_dependent_cells(fund, fm);
  Json result;
  result["size"] = m.size();
  result["network"] = network_to_json(fund);
  result["identity_fully_dependent"] =
      std::find(dependent.begin(), dependent.end(), 0u) != dependent.end();
  result["closure_size_matches"] = fm.size() == m.size();
  result["isomorphic_to_input"] = find_isomorphism(fund, net).has_value();
  ctx.emit_json(ctx.report(std::move(result), "ok"));
  return kExitOk;
}

// All set partitions of n cells as restricted growth strings.
std::vector<Partition> all_partitions(std::size_t n, std::size_t max_cells) {
  if (n > max_cells)
    throw CapacityExceeded("partition enumeration is limited to " + std::to_string(max_cells) +
                               " cells",
                           0);
  std::vector<Partition> out;
  std::vector<std::uint32_t> a(n, 0);
  for (;;) {
    out.emplace_back(a);
    bool advanced = false;
    for (std::size_t i = n; i-- > 1;) {
      const std::uint32_t mx = *std::max_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(i));
      if (a[i] <= mx) {
        ++a[i];
        std::fill(a.begin() + static_cast<std::ptrdiff_t>(i) + 1, a.end(), 0u);
        advanced = true;
        break;
      }
    }
    if (!advanced) return out;
  }
}

int cmd_partitions(Context& ctx, const std::string& file, bool all, std::size_t max_cells) {
  const NetworkSpec net = parse_network(parse_json(ctx.load(file), file));
  std::vector<Partition> parts =
      all ? all_partitions(net.cell_count(), max_cells) : enumerate_balanced_partitions(net, max_cells);
  Json list = Json::array();
  std::size_t balanced = 0;
  for (const auto& p : parts) {
    const bool b = is_balanced(net, p);
    balanced += b ? 1 : 0;
    Json e = partition_to_json(net, p);
    e["balanced"] = b;
    list.push_back(std::move(e));
  }
  Json result;
  result["cells"] = net.cells();
  result["count"] = parts.size();
  result["balanced_count"] = balanced;
  result["partitions"] = std::move(list);
  ctx.emit_json(ctx.report(std::move(result), "ok"));
  return kExitOk;
}

int cmd_quotient(Context& ctx, const std::string& file, const std::string& pfile) {
  const NetworkSpec net = parse_network(parse_json(ctx.load(file), file));
  const Partition p = parse_partition(net, parse_json(ctx.load(pfile), pfile));
  const Monoid m = monoid_closure(net);
  const QuotientResult q = quotient_network(net, m, p);
  Json proj = Json::array();
  for (std::size_t i = 0; i < m.size(); ++i)
    proj.push_back({{"element", m.word_string(static_cast<ElementIndex>(i))},
                    {"image", q.quotient_monoid.word_string(q.projection[i])}});
  bool hom = true;
  if (m.size() <= 1000) {
    for (std::size_t i = 0; i < m.size() && hom; ++i)
      for (std::size_t j = 0; j < m.size() && hom; ++j) {
        const auto ij = m.product(static_cast<ElementIndex>(i), static_cast<ElementIndex>(j));
        hom = q.projection[ij] == q.quotient_monoid.product(q.projection[i], q.projection[j]);
      }
  }
  Json result;
  result["partition"] = partition_to_json(net, p);
  result["quotient_network"] = network_to_json(q.quotient_net);
  result["monoid_size"] = m.size();
  result["quotient_monoid_size"] = q.quotient_monoid.size();
  result["projection"] = std::move(proj);
  result["homomorphism"] = hom;
  if (!hom) {
    ctx.emit_json(ctx.report(std::move(result), "fail"));
    return kExitViolation;
  }
  ctx.emit_json(ctx.report(std::move(result), "ok"));
  return kExitOk;
}

int cmd_blocks(Context& ctx, const std::string& file, bool projection_only) {
  const NetworkSpec net = parse_network(parse_json(ctx.load(file), file));
  const Monoid m = monoid_closure(net);
  Json list = Json::array();
  for (const auto& b : find_blocks(net)) {
    const auto pb = is_projection_block(net, m, b);
    if (projection_only && !pb) continue;
    Json e;
    e["members"] = labels_json(net, b.members);
    e["projection_block"] = pb.has_value();
    if (pb) {
      const auto& iota = m.element(*pb->idempotent);
      std::vector<CellIndex> images(iota.table().begin(), iota.table().end());
      e["kappa"] = m.word_string(*pb->witness_kappa);
      e["idempotent"] = m.word_string(*pb->idempotent);
      e["idempotent_map"] = labels_json(net, images);
    } else {
      e["kappa"] = nullptr;
      e["idempotent"] = nullptr;
      e["idempotent_map"] = nullptr;
    }
    list.push_back(std::move(e));
  }
  Json result;
  result["count"] = list.size();
  result["blocks"] = std::move(list);
  ctx.emit_json(ctx.report(std::move(result), "ok"));
  return kExitOk;
}

int cmd_decompose(Context& ctx, const std::string& file, std::size_t d, const std::string& mode) {
  require(d >= 1, "--dim must be at least 1");
  require(mode == "exact" || mode == "hybrid", "--mode must be exact or hybrid");
  const NetworkSpec net = parse_network(parse_json(ctx.load(file), file));
  const Monoid m = monoid_closure(net);
  const RegularRep rep(m, d);
  const DecomposeMode dm = mode == "exact" ? DecomposeMode::kExact : DecomposeMode::kHybrid;
  const Decomposition dec = decompose(rep, Subspace::full(rep.dim()), ctx.seed, dm);
  Json list = Json::array();
  for (const auto& s : dec.summands) {
    Json e;
    e["dim"] = s.space.dim();
    e["type"] = to_string(s.certificate.type);
    e["indecomposable"] = s.certificate.indecomposable;
    e["rational_irreducible"] = s.certificate.rational_irreducible;
    e["exact"] = s.space.is_exact();
    e["end_dim"] = s.certificate.end_dim;
    e["radical_dim"] = s.certificate.radical_dim;
    e["invariance_defect"] = s.space.is_exact() ? 0.0 : rep.invariance_defect(s.space);
    e["basis"] = s.space.is_exact() ? rational_rows(s.space.basis()) : float_rows(s.space.float_basis());
    list.push_back(std::move(e));
  }
  Json result;
  result["monoid_size"] = m.size();
  result["cell_dim"] = d;
  result["ambient_dim"] = rep.dim();
  result["mode"] = mode;
  result["coordinates"] = "element-major: index = element * cell_dim + component";
  result["summands"] = std::move(list);
  ctx.emit_json(ctx.report(std::move(result), "ok"));
  return kExitOk;
}

int cmd_verify_pb(Context& ctx, const std::string& file, const std::string& block,
                  const std::string& cell, std::size_t d) {
  const NetworkSpec net = parse_network(parse_json(ctx.load(file), file));
  const Monoid m = monoid_closure(net);
  Block b;
  for (const auto& label : split_csv(block)) b.members.push_back(net.cell(label));
  std::sort(b.members.begin(), b.members.end());
  b.members.erase(std::unique(b.members.begin(), b.members.end()), b.members.end());
  const CellIndex p = net.cell(cell);
  const auto dependent = fully_dependent_cells(net, m);
  if (std::find(dependent.begin(), dependent.end(), p) == dependent.end() && !ctx.quiet)
    *ctx.err << "warning: cell " << cell << " is not fully dependent\n";
  const auto rep = verify_projection_block_theorem(net, m, b, p, d);
  Json checks = Json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"holds", c.holds}, {"lhs_dim", c.lhs_dim}, {"rhs_dim", c.rhs_dim}});
  Json result;
  result["block"] = labels_json(net, rep.block);
  result["cell"] = net.label(rep.cell);
  result["cell_dim"] = rep.cell_dim;
  result["idempotent"] = m.word_string(rep.idempotent);
  result["kernel_dim"] = rep.kernel_dim;
  result["image_dim"] = rep.image_dim;
  result["checks"] = std::move(checks);
  const std::string status = rep.all_hold() ? "pass" : "fail";
  ctx.emit_json(ctx.report(std::move(result), status));
  return status_exit(status);
}

int cmd_simulate(Context& ctx, const std::string& file, const std::string& x0_text, double T,
                 std::optional<double> lambda_opt, std::size_t samples, const std::string& frame) {
  require(T > 0.0, "--T must be positive");
  require(samples >= 1, "--samples must be at least 1");
  require(frame == "lab" || frame == "rotating", "--frame must be lab or rotating");
  const Experiment e = parse_experiment(parse_json(ctx.load(file), file));
  if (!ctx.seed_given && e.seed) ctx.seed = *e.seed;
  const Monoid m = monoid_closure(*e.net);
  dyn::VectorField field = build_field(e, m);
  if (frame == "rotating") field = field.rotating_frame();
  double lambda = 0.0;
  if (lambda_opt) lambda = *lambda_opt;
  else if (e.lambda) lambda = e.lambda->from;
  std::vector<double> x;
  for (const auto& s : split_csv(x0_text)) x.push_back(parse_double(s, "--x0"));
  require(x.size() == field.dim(), "--x0 needs " + std::to_string(field.dim()) + " values");

  const auto cols = state_columns(*e.net, field.cell_dim());
  Json rows = Json::array();
  auto record = [&](double t) {
    Json r = Json::array();
    r.push_back(t);
    for (double v : x) r.push_back(v);
    rows.push_back(std::move(r));
  };
  record(0.0);
  dyn::OdeStatus status = dyn::OdeStatus::kOk;
  const dyn::Rhs rhs = dyn::autonomous(field, lambda);
  for (std::size_t i = 1; i <= samples; ++i) {
    const double t0 = T * static_cast<double>(i - 1) / static_cast<double>(samples);
    const double t1 = T * static_cast<double>(i) / static_cast<double>(samples);
    status = dyn::dopri5(rhs, x, t0, t1).status;
    if (status != dyn::OdeStatus::kOk) break;
    record(t1);
  }
  const std::string st = status == dyn::OdeStatus::kOk ? "ok" : "numeric-failure";
  if (ctx.json) {
    Json result;
    result["lambda"] = lambda;
    result["T"] = T;
    result["frame"] = frame;
    result["integrator"] = dyn::to_string(status);
    result["columns"] = cols;
    result["rows"] = std::move(rows);
    ctx.emit_json(ctx.report(std::move(result), st));
  } else if (!ctx.quiet) {
    *ctx.out << "t";
    for (const auto& c : cols) *ctx.out << "," << c;
    *ctx.out << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i)
        *ctx.out << (i ? "," : "") << format_double(r[i].get<double>());
      *ctx.out << "\n";
    }
  }
  if (status != dyn::OdeStatus::kOk) {
    *ctx.err << "integration stopped: " << dyn::to_string(status) << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

double nearest_target(double e, const std::vector<double>& targets) {
  double best = targets.front();
  for (double t : targets)
    if (std::abs(t - e) < std::abs(best - e)) best = t;
  return best;
}

int cmd_branches(Context& ctx, const std::string& file, const std::string& csv_path,
                 const std::string& report_path) {
  const Experiment e = parse_experiment(parse_json(ctx.load(file), file));
  if (!ctx.seed_given && e.seed) ctx.seed = *e.seed;
  require(e.lambda.has_value(), "branches needs a \"lambda\" grid");
  std::vector<double> grid = dyn::lambda_grid(e.lambda->from, e.lambda->to, e.lambda->points,
                                               e.lambda->log_scale);
  std::sort(grid.begin(), grid.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  const std::size_t k = e.ring ? e.ring->second : 0;
  std::ostringstream csv;
  Json result;
  std::string status = "ok";

  if (e.preset == dyn::Preset::kHopf) {
    require(e.ring.has_value(), "the ff-hopf sweep runs on {\"ring_ff\": [n, k]} networks");
    dyn::HopfOptions opt;
    opt.seed = ctx.seed;
    const auto rep = dyn::hopf_amplitude_sweep(e.ring->first, k, grid, opt);
    csv << "lambda,converged";
    for (const auto& c : e.net->cells()) csv << "," << c;
    csv << "\n";
    Json points = Json::array();
    for (const auto& p : rep.points) {
      csv << format_double(p.lambda) << "," << (p.converged ? 1 : 0);
      for (double a : p.amplitude) csv << "," << format_double(a);
      csv << "\n";
      points.push_back({{"lambda", p.lambda}, {"converged", p.converged},
                        {"integrator", dyn::to_string(p.status)}, {"amplitude", p.amplitude}});
    }
    Json fits = Json::array();
    bool all_pass = true;
    for (const auto& f : rep.fits) {
      const double tol = f.target == 0.5 ? 0.02 : 0.03;
      const bool pass = std::abs(f.fit.exponent - f.target) <= tol;
      const bool target_is_stretch = f.target < 0.1;
      if (!target_is_stretch) all_pass = all_pass && pass;
      Json j = fit_json(f.fit);
      j["cell"] = e.net->label(f.cell);
      j["target"] = f.target;
      j["tolerance"] = tol;
      j["pass"] = pass;
      j["required"] = !target_is_stretch;
      fits.push_back(std::move(j));
    }
    const bool flagged_ok = rep.flagged * 5 <= rep.points.size();
    result["kind"] = "hopf";
    result["locked_cells"] = labels_json(*e.net, rep.locked_cells);
    result["flagged"] = rep.flagged;
    result["flagged_ok"] = flagged_ok;
    result["fits"] = std::move(fits);
    result["points"] = std::move(points);
    status = all_pass && flagged_ok && rep.fits.size() >= std::min<std::size_t>(2, k) ? "pass" : "fail";
  } else {
    const Monoid m = monoid_closure(*e.net);
    const auto field = build_field(e, m);
    dyn::ContinuationOptions opt;
    opt.seed = ctx.seed;
    const auto branches = dyn::continue_branches(field, grid, opt);
    const bool scored = e.preset == dyn::Preset::kSteady && e.ring.has_value();
    std::vector<double> targets;
    for (std::size_t i = 0; i < k; ++i) targets.push_back(std::pow(0.5, static_cast<double>(i)));
    csv << "lambda,branch";
    for (const auto& c : e.net->cells()) csv << "," << c;
    csv << "\n";
    for (const auto& b : branches)
      for (const auto& p : b.points) {
        csv << format_double(p.lambda) << "," << b.id;
        for (double v : p.x) csv << "," << format_double(v);
        csv << "\n";
      }
    Json list = Json::array();
    bool all_pass = true;
    for (const auto& b : branches) {
      const bool bifurcating = !b.trivial() && b.points.size() == grid.size() && b.max_abs_at_end() <= 0.5;
      Json cells = Json::array();
      for (std::size_t q = 0; q < b.cells.size(); ++q) {
        const auto& cf = b.cells[q];
        Json c;
        c["cell"] = e.net->label(static_cast<CellIndex>(q));
        c["zero_locked"] = cf.zero_locked;
        c["fitted"] = cf.fitted;
        if (cf.fitted) {
          c["fit"] = fit_json(cf.fit);
          if (scored && bifurcating) {
            const double t = nearest_target(cf.fit.exponent, targets);
            const bool pass = std::abs(cf.fit.exponent - t) <= 0.05;
            all_pass = all_pass && pass;
            c["target"] = t;
            c["pass"] = pass;
          }
        }
        cells.push_back(std::move(c));
      }
      Json j;
      j["id"] = b.id;
      j["points"] = b.points.size();
      j["lambda_first"] = b.points.front().lambda;
      j["lambda_last"] = b.points.back().lambda;
      j["trivial"] = b.trivial();
      j["bifurcating"] = bifurcating;
      j["max_abs_at_end"] = b.max_abs_at_end();
      j["fingerprint"] = partition_to_json(*e.net, b.fingerprint)["classes"];
      j["cells"] = std::move(cells);
      j["warnings"] = b.warnings;
      list.push_back(std::move(j));
    }
    result["kind"] = "steady";
    result["scored"] = scored;
    result["targets"] = targets;
    result["branches"] = std::move(list);
    if (scored) status = all_pass ? "pass" : "fail";
  }
  result["grid"] = grid;
  const Json rep = ctx.report(std::move(result), status);
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    require(static_cast<bool>(f), "cannot write '" + csv_path + "'");
    f << csv.str();
  }
  if (!report_path.empty()) {
    std::ofstream f(report_path);
    require(static_cast<bool>(f), "cannot write '" + report_path + "'");
    f << rep.dump(2) << "\n";
  }
  if (ctx.json) ctx.emit_json(rep);
  else if (!ctx.quiet && csv_path.empty()) *ctx.out << csv.str();
  return status_exit(status);
}

int cmd_selftest(Context& ctx, std::optional<int> only) {
  Json list = Json::array();
  bool all = true;
  for (const auto& info : acceptance::criteria()) {
    if (only && *only != info.id) continue;
    const auto r = acceptance::run_criterion(info.id, ctx.seed);
    all = all && r.passed;
    if (!ctx.json && !ctx.quiet) *ctx.out << acceptance::format_line(r) << "\n" << std::flush;
    list.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed},
                    {"limit_seconds", r.limit_seconds}, {"detail", r.detail}});
  }
  require(!list.empty(), "no acceptance criterion " + std::to_string(only.value_or(0)));
  const std::string status = all ? "pass" : "fail";
  if (ctx.json) {
    Json result;
    result["criteria"] = std::move(list);
    ctx.emit_json(ctx.report(std::move(result), status));
  } else if (!ctx.quiet) {
    *ctx.out << (all ? "selftest: all criteria passed" : "selftest: FAILED") << "\n";
  }
  return status_exit(status);
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidInput:
    case ErrorKind::kCapacityExceeded:
    case ErrorKind::kParseError:
    case ErrorKind::kEvalError: return kExitInvalid;
    case ErrorKind::kNumericFailure: return kExitNumeric;
    case ErrorKind::kTheoremViolation:
    case ErrorKind::kInternalError: return kExitViolation;
  }
  return kExitViolation;
}

}  // namespace

// ---------------------------------------------------------------------------
// File formats

NetworkSpec parse_network(const Json& j) {
  require(j.is_object(), "network must be a JSON object");
  if (j.contains("ring_ff")) {
    const Json& r = j.at("ring_ff");
    require(r.is_array() && r.size() == 2 && r[0].is_number_unsigned() && r[1].is_number_unsigned(),
            "\"ring_ff\" must be [n, k]");
    return make_ring_ff(r[0].get<std::size_t>(), r[1].get<std::size_t>());
  }
  require(j.contains("cells") && j.at("cells").is_array(), "network needs a \"cells\" array");
  require(j.contains("generators") && j.at("generators").is_object(),
          "network needs a \"generators\" object");
  std::vector<std::string> cells;
  std::map<std::string, CellIndex> index;
  for (const auto& c : j.at("cells")) {
    require(c.is_string(), "cell labels must be strings");
    index.emplace(c.get<std::string>(), static_cast<CellIndex>(cells.size()));
    cells.push_back(c.get<std::string>());
  }
  auto lookup = [&](const std::string& label) {
    const auto it = index.find(label);
    require(it != index.end(), "unknown cell '" + label + "'");
    return it->second;
  };
  std::vector<Generator> gens;
  for (const auto& [name, map] : j.at("generators").items()) {
    require(map.is_object(), "generator '" + name + "' must map labels to labels");
    std::vector<CellIndex> table(cells.size(), 0);
    std::vector<char> seen(cells.size(), 0);
    for (const auto& [from, to] : map.items()) {
      require(to.is_string(), "generator '" + name + "': images must be labels");
      const CellIndex q = lookup(from);
      require(!seen[q], "generator '" + name + "' maps '" + from + "' twice");
      seen[q] = 1;
      table[q] = lookup(to.get<std::string>());
    }
    for (std::size_t q = 0; q < cells.size(); ++q)
      require(seen[q], "generator '" + name + "' is not total: '" + cells[q] + "' has no image");
    gens.push_back({name, CellMap(std::move(table))});
  }
  return NetworkSpec(std::move(cells), std::move(gens));
}

Json network_to_json(const NetworkSpec& net) {
  Json gens = Json::object();
  for (const auto& g : net.generators()) {
    Json map = Json::object();
    for (std::size_t q = 0; q < net.cell_count(); ++q)
      map[net.label(static_cast<CellIndex>(q))] = net.label(g.map[q]);
    gens[g.name] = std::move(map);
  }
  return Json{{"cells", net.cells()}, {"generators", std::move(gens)}};
}

Partition parse_partition(const NetworkSpec& net, const Json& j) {
  require(j.is_object() && j.contains("classes") && j.at("classes").is_array(),
          "partition needs a \"classes\" array");
  std::vector<std::vector<CellIndex>> classes;
  for (const auto& cls : j.at("classes")) {
    require(cls.is_array() && !cls.empty(), "partition classes must be nonempty arrays");
    std::vector<CellIndex> members;
    for (const auto& c : cls) {
      require(c.is_string(), "partition members must be cell labels");
      members.push_back(net.cell(c.get<std::string>()));
    }
    classes.push_back(std::move(members));
  }
  return Partition::from_classes(net.cell_count(), classes);
}

Json partition_to_json(const NetworkSpec& net, const Partition& p) {
  Json classes = Json::array();
  for (const auto& cls : p.classes()) classes.push_back(labels_json(net, cls));
  return Json{{"classes", std::move(classes)}};
}

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cellnet: coupled cell network analysis"};
  app.require_subcommand(1);
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  auto* seed_opt = app.add_option("--seed", ctx.seed, "Random seed (default 0)");
  app.add_flag("--json", ctx.json, "Print the JSON report");
  app.add_flag("--quiet", ctx.quiet, "Print nothing on stdout");

  std::string file, pfile, block, cell, mode = "hybrid", x0, csv_path, report_path, frame = "lab";
  std::size_t cap = kDefaultClosureCap, dim = 1, max_cells = 10, samples = 200;
  bool balanced = false, all = false, projection_only = false;
  double T = 0.0;
  std::optional<double> lambda;
  std::optional<int> only;

  auto* closure = app.add_subcommand("closure", "Monoid closure, Cayley table and words");
  closure->add_option("network", file, "Network JSON")->required();
  closure->add_option("--cap", cap, "Closure size limit");
  auto* fundamental = app.add_subcommand("fundamental", "Fundamental network");
  fundamental->add_option("network", file, "Network JSON")->required();
  auto* partitions = app.add_subcommand("partitions", "Balanced partitions");
  partitions->add_option("network", file, "Network JSON")->required();
  partitions->add_flag("--balanced", balanced, "Only balanced partitions (default)");
  partitions->add_flag("--all", all, "Every set partition, with its balance flag");
  partitions->add_option("--max-cells", max_cells, "Enumeration limit");
  auto* quotient = app.add_subcommand("quotient", "Quotient network and monoid projection");
  quotient->add_option("network", file, "Network JSON")->required();
  quotient->add_option("--partition", pfile, "Partition JSON")->required();
  auto* blocks = app.add_subcommand("blocks", "Blocks and projection blocks");
  blocks->add_option("network", file, "Network JSON")->required();
  blocks->add_flag("--projection-only", projection_only, "Only projection blocks");
  auto* decompose_cmd = app.add_subcommand("decompose", "Decompose the regular representation");
  decompose_cmd->add_option("network", file, "Network JSON")->required();
  decompose_cmd->add_option("--dim", dim, "Cell dimension d");
  decompose_cmd->add_option("--mode", mode, "exact | hybrid");
  auto* verify = app.add_subcommand("verify-pb", "Check the projection-block splitting identities");
  verify->add_option("network", file, "Network JSON")->required();
  verify->add_option("--block", block, "Comma-separated cell labels")->required();
  verify->add_option("--cell", cell, "Fully dependent cell")->required();
  verify->add_option("--dim", dim, "Cell dimension d");
  auto* simulate = app.add_subcommand("simulate", "Integrate an experiment; CSV trajectory");
  simulate->add_option("experiment", file, "Experiment JSON")->required();
  simulate->add_option("--x0", x0, "Comma-separated initial state")->required();
  simulate->add_option("--T", T, "Final time")->required();
  simulate->add_option("--lambda", lambda, "Parameter (default: grid start, else 0)");
  simulate->add_option("--samples", samples, "Output intervals");
  simulate->add_option("--frame", frame, "lab | rotating (ff-hopf only)");
  auto* branches = app.add_subcommand("branches", "Equilibrium branches or Hopf amplitudes");
  branches->add_option("experiment", file, "Experiment JSON")->required();
  branches->add_option("--csv", csv_path, "Write the CSV here instead of stdout");
  branches->add_option("--report", report_path, "Also write the JSON report here");
  auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");
  selftest->add_option("--only", only, "Run a single criterion");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitInvalid;
  }
  ctx.seed_given = seed_opt->count() > 0;
  auto* sub = app.get_subcommands().front();
  ctx.command = sub->get_name();
  ctx.args = args;
  try {
    if (sub == closure) return cmd_closure(ctx, file, cap);
    if (sub == fundamental) return cmd_fundamental(ctx, file);
    if (sub == partitions) {
      require(!(balanced && all), "--balanced and --all exclude each other");
      return cmd_partitions(ctx, file, all, max_cells);
    }
    if (sub == quotient) return cmd_quotient(ctx, file, pfile);
    if (sub == blocks) return cmd_blocks(ctx, file, projection_only);
    if (sub == decompose_cmd) return cmd_decompose(ctx, file, dim, mode);
    if (sub == verify) return cmd_verify_pb(ctx, file, block, cell, dim);
    if (sub == simulate) return cmd_simulate(ctx, file, x0, T, lambda, samples, frame);
    if (sub == branches) return cmd_branches(ctx, file, csv_path, report_path);
    if (sub == selftest) return cmd_selftest(ctx, only);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << " (at " << e.span().begin << ".." << e.span().end << ")\n";
    return kExitInvalid;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  err << "error: unknown command\n";
  return kExitInvalid;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace cellnet::cli
