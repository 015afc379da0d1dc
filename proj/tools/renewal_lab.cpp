#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "renewal_lab/experiments.hpp"

namespace rl = renewal_lab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitCriterion = 4;

struct Options {
  double beta = 0.5;
  double p = 0.5;
  std::string n = "10000";
  std::size_t n_max = std::size_t{1} << 20;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 42;
  unsigned shards = 1;
  std::string t_grid = rl::kDefaultTGrid;
  std::string out;
  std::string format;
  std::string masses;
  std::string engine = "fast";
  std::string rows = "dyadic";
  std::size_t m_max = 0;
  bool check = false;
  bool no_mc = false;
};

template <class T>
std::vector<T> parse_list(const std::string& s, const char* what) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) rl::fail(rl::ErrorCode::InvalidArgument, std::string("cannot parse ") + what + ": " + item);
    out.push_back(v);
  }
  if (out.empty()) rl::fail(rl::ErrorCode::InvalidArgument, std::string("empty ") + what);
  return out;
}

std::uint64_t single_n(const Options& o) {
  const auto v = parse_list<std::uint64_t>(o.n, "n");
  if (v.size() != 1) rl::fail(rl::ErrorCode::InvalidArgument, "this subcommand takes a single --n");
  return v.front();
}

rl::ReturnLaw make_law(const Options& o) {
  if (!o.masses.empty()) return rl::custom_return(parse_list<double>(o.masses, "masses"));
  return rl::power_law_return(o.beta, o.n_max);
}

rl::SimConfig sim(const Options& o) { return {o.seed, o.shards, o.samples, 0}; }

void put_config(rl::ExperimentReport& rep, const std::string& cmd, const Options& o) {
  auto& c = rep.meta()["config"];
  c["subcommand"] = cmd;
  c["beta"] = o.beta;
  c["p"] = o.p;
  c["n"] = o.n;
  c["n_max"] = o.n_max;
  c["samples"] = o.samples;
  c["seed"] = o.seed;
  c["t_grid"] = o.t_grid;
  if (!o.masses.empty()) c["masses"] = o.masses;
  c["engine"] = o.engine;
  c["rows"] = o.rows;
  c["m_max"] = o.m_max;
  c["check"] = o.check;
  c["mc"] = !o.no_mc;
}

std::string resolved_format(const Options& o) {
  if (!o.format.empty()) return o.format;
  if (o.out.size() >= 5 && o.out.substr(o.out.size() - 5) == ".json") return "json";
  if (o.out.size() >= 4 && o.out.substr(o.out.size() - 4) == ".csv") return "csv";
  return "json";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) rl::fail(rl::ErrorCode::InvalidArgument, "cannot open " + path.string());
  return f;
}

// CSV: first table at --out, the others next to it as <stem>.<table>.csv, and
// metadata plus verdicts in <out>.meta.json.
void emit(const rl::ExperimentReport& rep, const Options& o) {
  const std::string fmt = resolved_format(o);
  if (fmt == "json") {
    if (o.out.empty()) {
      rep.write_json(std::cout);
    } else {
      auto f = open_out(o.out);
      rep.write_json(f);
    }
    return;
  }
  if (rep.tables().empty()) return;
  if (o.out.empty()) {
    rl::ExperimentReport::write_csv(std::cout, rep.tables().front().second);
    return;
  }
  const std::filesystem::path out(o.out);
  {
    auto f = open_out(out);
    rl::ExperimentReport::write_csv(f, rep.tables().front().second);
  }
  rl::Json side;
  side["meta"] = rep.meta();
  rl::Json files = rl::Json::object();
  files[rep.tables().front().first] = out.filename().string();
  for (std::size_t i = 1; i < rep.tables().size(); ++i) {
    const auto& [name, table] = rep.tables()[i];
    std::filesystem::path p = out;
    p.replace_filename(out.stem().string() + "." + name + ".csv");
    auto f = open_out(p);
    rl::ExperimentReport::write_csv(f, table);
    files[name] = p.filename().string();
  }
  side["tables"] = files;
  side["verdicts"] = rep.to_json()["verdicts"];
  auto f = open_out(out.string() + ".meta.json");
  f << side.dump(2) << '\n';
}

rl::ExperimentReport run_law(const Options& o) {
  const rl::TransientLaw tl(make_law(o), o.p);
  const std::size_t rows = single_n(o);
  rl::ExperimentReport rep("law");
  put_config(rep, "law", o);
  rep.meta()["truncation_remainder"] = tl.base().truncation_remainder();
  if (tl.base().has_tail_index()) {
    rep.meta()["c_tail"] = tl.base().c_tail();
    rep.meta()["mass_coef"] = tl.base().mass_coef();
  }
  auto& t = rep.table("law", {"n", "a_n", "g_n", "tail_a", "tail_g"});
  for (std::size_t n = 1; n <= rows; ++n) {
    t.add({n, tl.base().mass(n), tl.g(n), tl.base().tail(n), tl.defective_tail(n)});
  }
  return rep;
}

rl::ExperimentReport run_renewal(const Options& o) {
  const rl::TransientLaw tl(make_law(o), o.p);
  const std::size_t N = single_n(o);
  if (o.engine != "fast" && o.engine != "direct") rl::fail(rl::ErrorCode::InvalidArgument, "engine must be fast or direct");
  const rl::RenewalSequence rs = o.engine == "fast" ? rl::renewal_fast(tl, N) : rl::renewal_direct(tl, N);
  rl::ExperimentReport rep("renewal");
  put_config(rep, "renewal", o);
  rep.meta()["total_mass"] = rl::total_mass(tl);
  std::vector<std::size_t> rows;
  if (o.rows == "all") {
    for (std::size_t n = 0; n <= N; ++n) rows.push_back(n);
  } else if (o.rows == "dyadic") {
    rows.push_back(0);
    for (std::size_t n : rl::dyadic_checkpoints(1, N)) rows.push_back(n);
    if (rows.back() != N) rows.push_back(N);
  } else {
    rl::fail(rl::ErrorCode::InvalidArgument, "rows must be all or dyadic");
  }
  const bool diag = tl.base().has_tail_index();
  const double nan = std::nan("");
  std::vector<double> r, R;
  if (diag) {
    r = rl::diag_pointwise(rs);
    R = rl::diag_tailsum(rs);
  }
  auto& t = rep.table("renewal", {"n", "u_n", "tail_u", "ratio_pointwise", "ratio_tailsum"});
  for (std::size_t n : rows) t.add({n, rs.u[n], rs.tail[n], diag ? r[n] : nan, diag ? R[n] : nan});
  if (o.check) {
    if (!diag) rl::fail(rl::ErrorCode::MissingTailIndex, "--check needs a power law");
    rep.verdict("pointwise", true, std::fabs(r[N] - 1.0) <= rl::kSection3Tolerance, rl::kSection3Tolerance,
                "r_N = " + rl::format_double(r[N]));
    rep.verdict("tailsum", true, std::fabs(R[N] - 1.0) <= rl::kSection3Tolerance, rl::kSection3Tolerance,
                "R_N = " + rl::format_double(R[N]));
  }
  return rep;
}

rl::ExperimentReport run_series(const Options& o) {
  auto rep = rl::series_report(o.beta, single_n(o));
  put_config(rep, "series-check", o);
  return rep;
}

rl::ExperimentReport run_arcsine(const Options& o) {
  rl::require_probability(o.p);
  rl::ArcsineConfig c;
  c.beta = o.beta;
  c.p = o.p;
  c.n_list = parse_list<std::uint64_t>(o.n, "n");
  c.t_grid = rl::parse_t_grid(o.t_grid);
  c.n_max = o.n_max;
  c.sim = sim(o);
  c.run_mc = !o.no_mc;
  auto rep = rl::arcsine_convergence_report(c);
  put_config(rep, "arcsine", o);
  return rep;
}

rl::ExperimentReport run_identity(const Options& o) {
  rl::Section5Config c;
  rl::require_probability(o.p);
  c.ps = {o.p};
  c.ns = parse_list<std::size_t>(o.n, "n");
  for (std::size_t n : c.ns) {
    if (n > rl::kExactScaleN) rl::fail(rl::ErrorCode::CapacityExceeded, "identity audit limited to n <= 60");
  }
  if (o.m_max > 0) c.m_cap = o.m_max;
  c.t_grid = rl::parse_t_grid(o.t_grid);
  c.sim = sim(o);
  c.run_mc = !o.no_mc;
  auto rep = rl::section5_audit(make_law(o), c);
  put_config(rep, "identity", o);
  return rep;
}

rl::ExperimentReport run_occupation(const Options& o) {
  const rl::ReturnLaw law = make_law(o);
  const std::size_t n = single_n(o);
  const std::size_t m_max = o.m_max > 0 ? o.m_max : n;
  const rl::OccupationTable tab = rl::sn_distribution(law, n, m_max);
  rl::ExperimentReport rep("occupation");
  put_config(rep, "occupation", o);
  auto& t = rep.table("occupation", {"m", "F_m", "P_S_n_eq_m"});
  for (std::size_t m = 0; m <= m_max; ++m) t.add({m, tab.F[m], tab.pmf(m)});
  if (law.has_tail_index() && law.beta() < 1.0) {
    rl::require_probability(o.p);
    const auto sr = rl::prop_surv_finite_report(law, o.p, n, rl::parse_t_grid(o.t_grid));
    auto& s = rep.table("survivor", {"t", "m", "W", "F_m", "ratio", "lower", "survivor_mass", "bounds_hold"});
    bool ok = true;
    for (const auto& r : sr.rows) {
      s.add({r.t, r.m, r.W, r.F_m, r.ratio, r.lower, r.survivor_mass, r.bounds_hold});
      ok = ok && r.bounds_hold;
    }
    rep.verdict("provable-bounds", true, ok, rl::kBoundSlack, "p^{m-1} <= W/F_m <= 1");
  }
  return rep;
}

rl::ExperimentReport run_darling_kac(const Options& o) {
  auto rep = rl::darling_kac_report(o.beta, single_n(o), sim(o), o.n_max);
  put_config(rep, "darling-kac", o);
  return rep;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renewal-sequence and occupation-time experiments"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--beta", o.beta, "tail index");
    sub->add_option("--p", o.p, "survival probability");
    sub->add_option("--n", o.n, "horizon (comma list where accepted)");
    sub->add_option("--n-max", o.n_max, "return-law table length");
    sub->add_option("--out", o.out, "output path");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--masses", o.masses, "custom law P(tau=1),P(tau=2),...");
  };
  auto mc = [&](CLI::App* sub) {
    sub->add_option("--samples", o.samples, "Monte Carlo paths");
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--shards", o.shards, "worker threads (results do not depend on it)");
    sub->add_flag("--no-mc", o.no_mc, "skip Monte Carlo");
  };
  auto t_grid = [&](CLI::App* sub) { sub->add_option("--t-grid", o.t_grid, "start:stop:count"); };

  auto* law = app.add_subcommand("law", "tabulate the return law and its punctured version");
  common(law);
  auto* ren = app.add_subcommand("renewal", "renewal sequence and diagnostic ratios");
  common(ren);
  ren->add_option("--engine", o.engine, "fast or direct");
  ren->add_option("--rows", o.rows, "all or dyadic");
  ren->add_flag("--check", o.check, "assert the final diagnostic ratios");
  auto* ser = app.add_subcommand("series-check", "decay regimes of (1-z)^{-1} A(z) B(z)");
  common(ser);
  auto* arc = app.add_subcommand("arcsine", "exact last-visit sum, its limit and Monte Carlo");
  common(arc);
  mc(arc);
  t_grid(arc);
  auto* idn = app.add_subcommand("identity", "occupation identities and bounds audit");
  common(idn);
  mc(idn);
  t_grid(idn);
  idn->add_option("--m-max", o.m_max, "largest m per n");
  auto* occ = app.add_subcommand("occupation", "distribution of the occupation count");
  common(occ);
  t_grid(occ);
  occ->add_option("--m-max", o.m_max, "largest m");
  auto* dk = app.add_subcommand("darling-kac", "normalized occupation moments, recurrent case");
  common(dk);
  mc(dk);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    std::optional<rl::ExperimentReport> rep;
    if (*law) rep = run_law(o);
    else if (*ren) rep = run_renewal(o);
    else if (*ser) rep = run_series(o);
    else if (*arc) rep = run_arcsine(o);
    else if (*idn) rep = run_identity(o);
    else if (*occ) rep = run_occupation(o);
    else if (*dk) rep = run_darling_kac(o);
    emit(*rep, o);
    return rep->any_failed() ? kExitCriterion : kExitOk;
  } catch (const rl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == rl::ErrorCode::CapacityExceeded ? kExitCapacity : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
