#include "pbgw/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pbgw/engine.hpp"
#include "pbgw/gkm.hpp"
#include "pbgw/insertions.hpp"

namespace pbgw {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TargetPtr resolve_target(const std::string& spec) {
  if (spec.find('.') != std::string::npos || spec.find('/') != std::string::npos)
    return TargetModel::from_json(slurp(spec));
  if (spec.rfind("split:", 0) == 0) {
    std::vector<long> twists;
    std::istringstream ss(spec.substr(6));
    std::string tok;
    while (std::getline(ss, tok, ',')) twists.push_back(std::stol(tok));
    return TargetModel::split_over_p1(twists);
  }
  return TargetModel::builtin(spec);
}

GKMData resolve_gkm(const std::string& spec) {
  if (spec.find('.') != std::string::npos || spec.find('/') != std::string::npos)
    return GKMData::from_json(slurp(spec));
  if (spec.rfind("split:", 0) == 0) {
    std::vector<long> twists;
    std::istringstream ss(spec.substr(6));
    std::string tok;
    while (std::getline(ss, tok, ',')) twists.push_back(std::stol(tok));
    return gkm_split_over_p1(twists);
  }
  return gkm_builtin(spec);
}

CurveClass parse_degree(const std::string& text) {
  CurveClass beta;
  auto semi = text.find(';');
  beta.fiber = std::stol(text.substr(0, semi));
  if (semi != std::string::npos) {
    std::istringstream rest(text.substr(semi + 1));
    std::string tok;
    while (std::getline(rest, tok, ',')) beta.base.push_back(std::stol(tok));
  }
  return beta;
}

// Insertion expressions for the oracle reuse the CLI grammar with atoms
// resolved against the moment graph's divisor names (H is a divisor name).
std::vector<OracleInsertion> parse_oracle_insertions(const GKMData& g,
                                                     const std::string& text) {
  std::vector<OracleInsertion> out;
  std::istringstream ss(text);
  std::string term;
  while (std::getline(ss, term, ',')) {
    OracleInsertion ins;
    std::istringstream ts(term);
    std::string tok;
    std::vector<int> powers(g.divisors.size(), 0);
    bool any = false;
    std::string word;
    // crude tokenization: psi^K and NAME^E factors separated by '*' or space
    std::string cleaned;
    for (char c : term) cleaned += (c == '*') ? ' ' : c;
    std::istringstream ws(cleaned);
    while (ws >> word) {
      if (word.rfind("psi^", 0) == 0) {
        ins.psi = std::stoi(word.substr(4));
        continue;
      }
      if (word == "1") {
        any = true;
        continue;
      }
      std::string nm = word;
      int e = 1;
      auto car = word.find('^');
      if (car != std::string::npos) {
        nm = word.substr(0, car);
        e = std::stoi(word.substr(car + 1));
      }
      if (!nm.empty() && nm.front() == '[' && nm.back() == ']')
        nm = nm.substr(1, nm.size() - 2);
      powers[g.divisor_index(nm)] += e;
      any = true;
    }
    if (!any) throw std::invalid_argument("empty oracle insertion term");
    OracleClass::Term t;
    t.coef = Rational(1);
    t.divisor_power = powers;
    ins.cls.terms.push_back(t);
    out.push_back(std::move(ins));
  }
  return out;
}

std::optional<TwistSpec> parse_twist(const GKMData& g, const std::string& text) {
  if (text.empty()) return std::nullopt;
  TwistSpec spec;
  int h = g.divisor_index("H");
  if (text == "o1" || text == "O(1)") {
    TwistSummand s;
    s.scaling = -1;
    for (int p = 0; p < g.points(); ++p) s.value_at.push_back(g.divisors[h].value_at[p]);
    spec.push_back(s);
    return spec;
  }
  if (text.rfind("v:", 0) == 0) {
    std::istringstream ss(text.substr(2));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      long a = std::stol(tok);
      TwistSummand s;
      s.scaling = +1;
      for (int p = 0; p < g.points(); ++p) {
        std::vector<Rational> v(g.lattice_rank, Rational(0));
        for (int i = 0; i < g.lattice_rank; ++i)
          v[i] = g.divisors[h].value_at[p][i] * Rational(a);
        s.value_at.push_back(v);
      }
      spec.push_back(s);
    }
    return spec;
  }
  throw std::invalid_argument("unknown twist spec: " + text +
                              " (use \"o1\" or \"v:a1,a2,...\")");
}

int cmd_verify_example(int max_n, std::ostream& out) {
  bool ok = true;
  for (int n = 1; n <= max_n; ++n) {
    auto t = TargetModel::projective_space(n);
    Engine eng(t);
    Insertion ins{2 * n - 1, EqClass::unit(t->fiber_ctx())};
    Rational got = eng.compute_invariant(t->fiber_class(1), {ins});
    Rational expect = binomial(2 * n, n) * Rational(n % 2 ? -1 : 1);
    bool line_ok = got == expect;
    ok = ok && line_ok;
    out << "n=" << n << ": " << got.str() << (line_ok ? " OK" : " MISMATCH") << "\n";
  }
  return ok ? 0 : 1;
}

int report_lines(const VerificationReport& rep, bool verbose, std::ostream& out) {
  int bad = 0;
  for (auto& l : rep.lines) {
    if (!l.ok) ++bad;
    if (verbose || !l.ok)
      out << l.label << ": " << l.lhs << (l.ok ? " == " : " != ") << l.rhs
          << (l.ok ? " OK" : " FAIL") << "\n";
  }
  out << rep.lines.size() << " checks, " << bad << " failures\n";
  return bad == 0 ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"exact genus-0 Gromov-Witten engine for projective bundles"};
  app.require_subcommand(1);

  // --- compute -------------------------------------------------------------
  auto* compute = app.add_subcommand("compute", "solve one untwisted invariant");
  std::string c_target, c_degree, c_ins, c_cache;
  bool c_explain = false;
  compute->add_option("--target", c_target, "builtin (Pn, split:t1,t2) or JSON file")
      ->required();
  compute->add_option("--degree", c_degree, "curve class, e.g. 2 or 1;1")->required();
  compute->add_option("--insertions", c_ins, "e.g. \"psi^1 H, H^2\"");
  compute->add_option("--cache", c_cache, "JSONL cache file to load and update");
  compute->add_flag("--explain", c_explain, "print per-graph contributions");

  // --- oracle --------------------------------------------------------------
  auto* oracle = app.add_subcommand("oracle", "fixed-point graph-sum invariant");
  std::string o_gkm, o_degree, o_ins, o_twist;
  oracle->add_option("--gkm", o_gkm, "builtin (Pn, P1xP1, Fa, split:t1,t2) or JSON file")
      ->required();
  oracle->add_option("--degree", o_degree, "curve class in the gkm lattice")->required();
  oracle->add_option("--insertions", o_ins, "e.g. \"psi^2 H, H\"");
  oracle->add_option("--twist", o_twist, "\"o1\" or \"v:a1,a2,...\"");

  // --- verify --------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "run a built-in verification");
  verify->require_subcommand(1);
  auto* v_example = verify->add_subcommand("example", "one-point descendants of P^n");
  int ve_max_n = 4;
  v_example->add_option("--max-n", ve_max_n, "largest projective space");
  auto* v_thma = verify->add_subcommand("theorem-a", "equal-Chern pair comparison");
  std::string vt_pair = "hirzebruch";
  int vt_acdeg = 6, vt_marks = 4;
  bool vt_verbose = false;
  v_thma->add_option("--pair", vt_pair, "equal-Chern pair (hirzebruch)");
  v_thma->add_option("--max-acdeg", vt_acdeg, "anticanonical degree bound");
  v_thma->add_option("--max-marks", vt_marks, "marking bound");
  v_thma->add_flag("--verbose", vt_verbose, "print every checked line");
  auto* v_tw = verify->add_subcommand("lemma-tw", "twisted equality for the pair");
  int vl_deg = 3, vl_marks = 3;
  bool vl_verbose = false;
  v_tw->add_option("--max-degree", vl_deg, "largest curve degree");
  v_tw->add_option("--max-marks", vl_marks, "marking bound");
  v_tw->add_flag("--verbose", vl_verbose, "print every checked line");

  // --- graphs --------------------------------------------------------------
  auto* graphs = app.add_subcommand("graphs", "decorated graph utilities");
  graphs->require_subcommand(1);
  auto* gdump = graphs->add_subcommand("dump", "list fixed-locus graphs");
  std::string g_target, g_degree;
  int g_n = 0;
  gdump->add_option("--target", g_target)->required();
  gdump->add_option("--degree", g_degree)->required();
  gdump->add_option("-n", g_n, "number of markings");

  // --- cache ---------------------------------------------------------------
  auto* cache = app.add_subcommand("cache", "invariant cache utilities");
  cache->require_subcommand(1);
  auto* cshow = cache->add_subcommand("show", "print records");
  std::string cs_path;
  cshow->add_option("path", cs_path)->required();
  auto* cmerge = cache->add_subcommand("merge", "merge caches, error on conflicts");
  std::string cm_out;
  std::vector<std::string> cm_in;
  cmerge->add_option("--out", cm_out)->required();
  cmerge->add_option("inputs", cm_in)->required();

  std::vector<std::string> argv = args;
  std::vector<char*> cargv;
  std::string prog = "pbgw";
  cargv.push_back(prog.data());
  for (auto& a : argv) cargv.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help
      out << app.help() << "\n";
      return 0;
    }
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*compute) {
      auto t = resolve_target(c_target);
      Engine eng(t);
      if (!c_cache.empty()) {
        std::ifstream probe(c_cache);
        if (probe.good()) eng.cache().load_file(c_cache);
      }
      auto ins = parse_insertions(*t, c_ins);
      Rational v = eng.compute_invariant(parse_degree(c_degree), ins);
      if (c_explain)
        for (auto& b : eng.last_breakdown())
          out << "  " << b.graph << " -> " << b.value.str() << "\n";
      out << v.str() << "\n";
      if (!c_cache.empty()) eng.cache().save_file(c_cache);
      return 0;
    }
    if (*oracle) {
      auto g = resolve_gkm(o_gkm);
      auto ins = o_ins.empty() ? std::vector<OracleInsertion>{}
                               : parse_oracle_insertions(g, o_ins);
      std::vector<long> beta;
      {
        std::istringstream ss(o_degree);
        std::string tok;
        while (std::getline(ss, tok, ',')) beta.push_back(std::stol(tok));
      }
      auto tw = parse_twist(g, o_twist);
      out << oracle_invariant(g, beta, ins, tw).str() << "\n";
      return 0;
    }
    if (*v_example) return cmd_verify_example(ve_max_n, out);
    if (*v_thma) {
      if (vt_pair != "hirzebruch") {
        err << "usage error: unknown pair " << vt_pair << "\n";
        return 2;
      }
      return report_lines(verify_theorem_A(vt_acdeg, vt_marks), vt_verbose, out);
    }
    if (*v_tw) return report_lines(verify_lemma_tw(vl_deg, vl_marks), vl_verbose, out);
    if (*gdump) {
      auto t = resolve_target(g_target);
      for (auto& g : enumerate_graphs(*t, parse_degree(g_degree), g_n))
        out << g.dump_line() << "\n";
      return 0;
    }
    if (*cshow) {
      InvariantCache c;
      c.load_file(cs_path);
      for (auto& [k, v] : c.records()) out << k << " = " << v.str() << "\n";
      return 0;
    }
    if (*cmerge) {
      InvariantCache c;
      for (auto& p : cm_in) c.load_file(p);
      c.save_file(cm_out);
      out << c.size() << " records\n";
      return 0;
    }
  } catch (const CLI::Error& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "usage error: no subcommand\n";
  return 2;
}

}  // namespace pbgw
