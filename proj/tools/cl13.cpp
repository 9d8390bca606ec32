// Command-line frontend: parse, decide, check, play, arena, corpus, oracle.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "cl13/arena.hpp"
#include "cl13/classical.hpp"
#include "cl13/completeness.hpp"
#include "cl13/corpus.hpp"
#include "cl13/prover.hpp"
#include "cl13/semantics.hpp"
#include "cl13/session.hpp"
#include "cl13/strategy.hpp"

using namespace cl13;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kBudget = 3;
constexpr int kFailed = 4;

System parse_system(const std::string& s) {
  if (s == "cl13") return System::CL13;
  if (s == "cl14") return System::CL14;
  if (s == "cl14bar") return System::CL14Bar;
  throw std::invalid_argument("unknown system " + s);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "p=true; Q=1 !| 0" or a file path prefixed with '@'.
Interpretation read_itp(const std::string& arg) {
  if (arg.empty()) return {};
  std::string text = arg[0] == '@' ? slurp(arg.substr(1)) : arg;
  for (auto& c : text)
    if (c == ';') c = '\n';
  return parse_interpretation(text);
}

int cmd_parse(const std::string& text) {
  Formula f = parse(text);
  FormulaClass c = classify(f);
  std::cout << print(f) << "\n";
  std::cout << "elementary=" << c.is_elementary << " quasielementary=" << c.is_quasielementary
            << " elementary-base=" << c.is_elementary_base << "\n";
  return kOk;
}

int cmd_decide(const std::string& text, const std::string& system, const std::string& proof_out, bool prune,
               std::size_t budget) {
  Formula f = parse(text);
  DecideOptions o;
  o.claim45_pruning = prune;
  o.budget = budget;
  o.build_proof = !proof_out.empty();
  Verdict v = decide(f, parse_system(system), o);
  std::cout << (v.provable ? "provable" : "unprovable") << "\n";
  std::cerr << "subgoals: " << v.subgoals << "\n";
  if (v.provable && !proof_out.empty()) {
    std::ofstream out(proof_out);
    out << write_proof(v.proof);
    if (!out) throw std::runtime_error("cannot write " + proof_out);
  }
  return kOk;
}

int cmd_check(const std::string& path, bool prune) {
  ProofPtr p = read_proof(slurp(path));
  RuleOptions o;
  o.claim45_pruning = prune;
  CheckResult r = check_proof(p, o);
  if (r.ok) {
    std::cout << "ok\n";
    return kOk;
  }
  std::cout << "error at node " << r.node << ": " << r.reason << "\n";
  return kInputError;
}

int cmd_corpus(bool verbose) {
  int bad = 0;
  for (const auto& e : corpus()) {
    Formula f = parse(e.text);
    Verdict v = decide_cl13(f);
    bool agree = !e.provable || *e.provable == v.provable;
    bad += agree ? 0 : 1;
    if (verbose || !agree)
      std::cout << (agree ? "ok   " : "FAIL ") << e.id << "  " << print(f) << "  "
                << (v.provable ? "provable" : "unprovable") << "\n";
  }
  std::cout << corpus().size() << " formulas, " << bad << " disagreements\n";
  return bad ? kFailed : kOk;
}

int cmd_arena(const std::string& text, const std::string& opp, int seeds, int switch_budget, int molecular,
              std::size_t budget, unsigned jobs, std::uint64_t seed, const std::string& failures_dir) {
  Formula f = parse(text);
  Verdict v = decide_cl13(f);
  if (!v.provable) {
    std::cout << "unprovable: no machine strategy to test\n";
    return kFailed;
  }
  ArenaOptions o;
  o.opponent = parse_agent_kind(opp);
  o.seeds = seeds;
  o.switch_budget = switch_budget;
  o.molecular = molecular;
  o.budget = budget;
  o.jobs = jobs;
  o.seed = seed;
  ArenaReport r = work_arena(f, v.proof, o);
  std::cout << "matches " << r.matches << "  machine wins " << r.wins << "  adequacy checks " << r.adequacy_checks
            << "  failures " << r.failures.size() << "\n";
  for (std::size_t i = 0; i < r.failures.size(); ++i) {
    if (i < 3) std::cout << r.failures[i].reason << "\n" << r.failures[i].transcript;
    if (!failures_dir.empty()) {
      std::filesystem::create_directories(failures_dir);
      std::ofstream(std::filesystem::path(failures_dir) / ("failure" + std::to_string(i) + ".transcript"))
          << r.failures[i].transcript;
    }
  }
  return r.ok() ? kOk : kFailed;
}

// Compares the proof verdict with brute-force play of the bounded game under every
// boolean interpretation (general atoms get molecule-shaped games).
int cmd_oracle(const std::string& text, int switch_budget, int molecular, std::uint64_t seed) {
  Formula f = parse(text);
  Verdict v = decide_cl13(f);
  std::cout << (v.provable ? "provable" : "unprovable") << "\n";
  int machine = 0, total = 0;
  for (const auto& itp : interpretations_for(f, molecular, seed)) {
    Player w = solve_bounded(interpret(f, itp), switch_budget);
    ++total;
    machine += w == Player::Machine ? 1 : 0;
    std::string line = interpretation_text(itp);
    for (auto& c : line)
      if (c == '\n') c = ';';
    std::cout << player_name(w) << "  " << line << "\n";
  }
  std::cout << "bounded game (switch budget " << switch_budget << "): machine wins " << machine << "/" << total
            << "\n";
  if (v.provable && machine != total) {
    std::cout << "disagreement: a provable formula lost a bounded game\n";
    return kFailed;
  }
  return kOk;
}

int cmd_play_tty(const std::string& text, const Interpretation& itp, std::size_t budget, bool counter) {
  Session s("tty", parse(text), itp, budget, counter);
  std::cout << "you play " << player_name(s.human()) << "; enter moves like 2.1, 'pass', 'legal' or 'quit'\n";
  while (!s.finished()) {
    json v = s.view();
    std::cout << "game: " << v["game"].get<std::string>() << "\nrun:  " << v["run_text"].get<std::string>() << "\n> "
              << std::flush;
    std::string line;
    if (!std::getline(std::cin, line) || line == "quit") break;
    if (line == "legal") {
      for (const auto& m : s.legal()) std::cout << m.text() << " ";
      std::cout << "\n";
      continue;
    }
    std::optional<Move> m;
    if (line != "pass" && !line.empty()) {
      try {
        m = Move::parse(line);
      } catch (const std::exception& e) {
        std::cout << "bad move: " << e.what() << "\n";
        continue;
      }
    }
    if (auto err = s.play(m)) std::cout << *err << "\n";
  }
  json v = s.view();
  std::cout << "run: " << v["run_text"].get<std::string>() << "\n";
  if (s.finished()) std::cout << "winner: " << v["winner"].get<std::string>() << "\n";
  return kOk;
}

int cmd_serve(const std::string& host, int port, const std::string& transcripts) {
  SessionOptions o;
  o.transcript_dir = transcripts;
  SessionService svc(o);
  httplib::Server srv;
  auto route = [&svc](const httplib::Request& req, httplib::Response& res) {
    HttpResponse r = svc.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json");
  };
  srv.Get(R"(/session/.*)", route);
  srv.Post(R"(/session(/.*)?)", route);
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!srv.listen(host, port)) {
    std::cerr << "cannot listen on " << host << ":" << port << "\n";
    return kFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CL13 prover, game evaluator and strategy workbench"};
  app.require_subcommand(1);

  std::string formula, system = "cl13", proof_out, path, itp_text, opp = "random", failures_dir, host = "127.0.0.1",
                       transcripts;
  bool prune = false, verbose = false, tty = false, serve = false, counter = false;
  std::size_t budget = 1000000, match_budget = 400;
  int seeds = 100, switch_budget = 3, molecular = 3, port = 8080;
  unsigned jobs = 1;
  std::uint64_t seed = 1;

  auto* p = app.add_subcommand("parse", "print the canonical form and classification");
  p->add_option("formula", formula)->required();

  auto* d = app.add_subcommand("decide", "decide provability");
  d->add_option("formula", formula)->required();
  d->add_option("--system", system)->check(CLI::IsMember({"cl13", "cl14", "cl14bar"}));
  d->add_option("--proof-out", proof_out, "write the proof here when provable");
  d->add_flag("--prune", prune, "skip tails of sequential osubformulas");
  d->add_option("--budget", budget, "subgoal budget");

  auto* c = app.add_subcommand("check", "check a proof file");
  c->add_option("proof", path)->required()->check(CLI::ExistingFile);
  c->add_flag("--prune", prune);

  auto* pl = app.add_subcommand("play", "play interactively as the environment (or machine with --counter)");
  pl->add_option("formula", formula);
  pl->add_flag("--tty", tty);
  pl->add_flag("--serve", serve);
  pl->add_flag("--counter", counter, "play against the counterstrategy of a CL14-unprovable formula");
  pl->add_option("--interp", itp_text, "e.g. \"p=true; Q=1 !| 0\" or @file");
  pl->add_option("--budget", match_budget);
  pl->add_option("--host", host);
  pl->add_option("--port", port);
  pl->add_option("--transcripts", transcripts, "directory for finished-session transcripts");

  auto* ar = app.add_subcommand("arena", "batch matches of WORK against an opponent");
  ar->add_option("formula", formula)->required();
  ar->add_option("--opponent", opp)->check(CLI::IsMember({"silent", "random", "minimax"}));
  ar->add_option("--seeds", seeds);
  ar->add_option("--switch-budget", switch_budget);
  ar->add_option("--molecular", molecular, "molecule-shaped interpretations per assignment");
  ar->add_option("--budget", match_budget);
  ar->add_option("--jobs", jobs);
  ar->add_option("--seed", seed);
  ar->add_option("--failures", failures_dir, "write failing transcripts here");

  auto* co = app.add_subcommand("corpus", "decide the built-in corpus and compare with known verdicts");
  co->add_flag("-v,--verbose", verbose);

  auto* o = app.add_subcommand("oracle", "compare the verdict with bounded game solving");
  o->add_option("formula", formula)->required();
  o->add_option("--switch-budget", switch_budget)->default_val(1);
  o->add_option("--molecular", molecular)->default_val(2);
  o->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*p) return cmd_parse(formula);
    if (*d) return cmd_decide(formula, system, proof_out, prune, budget);
    if (*c) return cmd_check(path, prune);
    if (*co) return cmd_corpus(verbose);
    if (*ar) return cmd_arena(formula, opp, seeds, switch_budget, molecular, match_budget, jobs, seed, failures_dir);
    if (*o) return cmd_oracle(formula, switch_budget, molecular, seed);
    if (*pl) {
      if (serve) return cmd_serve(host, port, transcripts);
      if (formula.empty()) throw CLI::RequiredError("formula");
      return cmd_play_tty(formula, read_itp(itp_text), match_budget, counter);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error " << e.what() << "\n";
    return kInputError;
  } catch (const ProofFormatError& e) {
    std::cerr << "proof file " << e.what() << "\n";
    return kInputError;
  } catch (const ResourceExhausted& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return kBudget;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}
