#pragma once

#include <atomic>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "classical.hpp"
#include "completeness.hpp"
#include "prover.hpp"
#include "semantics.hpp"
#include "strategy.hpp"

namespace cl13 {

// All 2^n boolean assignments to the named atoms, in lexicographic order.
inline std::vector<Model> boolean_models(const std::vector<std::string>& names) {
  if (names.size() > 20) throw std::length_error("too many atoms to enumerate");
  std::vector<Model> out;
  for (std::uint64_t x = 0; x < (1ULL << names.size()); ++x) {
    Model m;
    for (std::size_t i = 0; i < names.size(); ++i) m[names[i]] = (x >> (names.size() - 1 - i)) & 1;
    out.push_back(std::move(m));
  }
  return out;
}

// (A11 !| ... !| A1m) !& ... !& (Am1 !| ... !| Amm) with random constant leaves.
inline GameSpec molecule_game(int m, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<Formula> rows;
  for (int a = 0; a < m; ++a) {
    std::vector<Formula> cells;
    for (int b = 0; b < m; ++b) cells.push_back(coin(rng) ? Formula::top() : Formula::bot());
    rows.push_back(Formula::nary(Connective::ChoOr, std::move(cells)));
  }
  return GameSpec{Formula::nary(Connective::ChoAnd, std::move(rows))};
}

// Every boolean assignment of the elementary atoms, each combined with `molecular`
// random molecule-shaped interpretations of the general atoms (one when there are none).
inline std::vector<Interpretation> interpretations_for(const Formula& f, int molecular, std::uint64_t seed,
                                                       int molecule_arity = 2) {
  std::vector<std::string> elem, gen;
  for (const auto& a : atoms(f)) (a.is_general() ? gen : elem).push_back(a.name);
  std::mt19937_64 rng(seed);
  std::vector<Interpretation> out;
  const int rounds = gen.empty() ? 1 : molecular;
  for (const auto& m : boolean_models(elem)) {
    for (int r = 0; r < rounds; ++r) {
      Interpretation itp;
      itp.elem = m;
      for (const auto& g : gen) itp.gen[g] = molecule_game(molecule_arity, rng);
      out.push_back(std::move(itp));
    }
  }
  return out;
}

enum class AgentKind : std::uint8_t { Silent, Random, Minimax };

inline std::string agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::Silent: return "silent";
    case AgentKind::Random: return "random";
    case AgentKind::Minimax: return "minimax";
  }
  return "?";
}

inline AgentKind parse_agent_kind(const std::string& s) {
  if (s == "silent") return AgentKind::Silent;
  if (s == "random") return AgentKind::Random;
  if (s == "minimax") return AgentKind::Minimax;
  throw std::invalid_argument("unknown agent kind " + s);
}

inline std::unique_ptr<Agent> make_agent(AgentKind k, const GameSpec& g, Player self, std::uint64_t seed,
                                         int switch_budget) {
  switch (k) {
    case AgentKind::Silent: return std::make_unique<SilentAgent>();
    case AgentKind::Random: {
      RandomAgentOptions o;
      o.switch_budget = switch_budget;
      return std::make_unique<RandomAgent>(g, self, seed, o);
    }
    case AgentKind::Minimax: return std::make_unique<MinimaxAgent>(g, self, std::min(switch_budget, 2));
  }
  throw std::logic_error("agent kind");
}

struct ArenaOptions {
  AgentKind opponent = AgentKind::Random;
  int seeds = 100;
  int switch_budget = 3;
  int molecular = 3;  // molecule-shaped interpretations per boolean assignment
  std::size_t budget = 400;
  bool check_adequacy = true;
  unsigned jobs = 1;
  std::uint64_t seed = 1;
};

struct ArenaFailure {
  std::string reason;
  std::string transcript;
};

struct ArenaReport {
  std::size_t matches = 0;
  std::size_t wins = 0;  // by the proof agent
  std::size_t adequacy_checks = 0;
  std::vector<ArenaFailure> failures;
  bool ok() const { return failures.empty() && wins == matches; }
};

namespace detail {

template <class Job>
void parallel_for(std::size_t n, unsigned jobs, Job&& job) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) job(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

// WORK against an opponent over every interpretation and seed. The proof must prove f.
inline ArenaReport work_arena(const Formula& f, const ProofPtr& proof, const ArenaOptions& o) {
  auto tree = std::make_shared<AnnotatedTree>(proof);
  tree->expand_all();  // shared read-only afterwards
  auto itps = interpretations_for(f, o.molecular, o.seed);
  const std::size_t n = itps.size() * static_cast<std::size_t>(o.seeds);
  std::vector<ArenaReport> parts(n);
  detail::parallel_for(n, o.jobs, [&](std::size_t i) {
    const Interpretation& itp = itps[i / static_cast<std::size_t>(o.seeds)];
    const std::uint64_t seed = o.seed * 1000003 + i;
    ArenaReport& rep = parts[i];
    GameSpec g = interpret(f, itp);
    ProofAgent w(tree, Player::Machine);
    auto env = make_agent(o.opponent, g, Player::Environment, seed, o.switch_budget);
    MatchResult r = run_match(g, w, *env, o.budget);
    rep.matches = 1;
    rep.wins = r.winner == Player::Machine ? 1 : 0;
    auto fail = [&](const std::string& why) {
      TranscriptHeader h{print(f), interpretation_text(itp), w.name(), env->name(), seed, o.budget};
      rep.failures.push_back({why, transcript_text(h, r)});
    };
    if (!rep.wins) fail("machine lost");
    if (!w.anomalies().empty()) fail("agent anomaly: " + w.anomalies().front());
    if (o.check_adequacy) {
      for (const auto& j : w.jumps()) {
        Run pre(w.view().begin(), w.view().begin() + static_cast<long>(j.position));
        auto a = check_adequacy(tree->node(j.node).hyper, pre, Player::Machine, &g);
        ++rep.adequacy_checks;
        if (!a.ok()) {
          fail("inadequate at node " + std::to_string(j.node) + ": " + a.detail);
          break;
        }
      }
    }
  });
  ArenaReport total;
  for (auto& p : parts) {
    total.matches += p.matches;
    total.wins += p.wins;
    total.adequacy_checks += p.adequacy_checks;
    for (auto& fl : p.failures) total.failures.push_back(std::move(fl));
  }
  return total;
}

struct CounterCheck {
  bool ok = false;
  std::string reason;
  MatchResult match;
  Model countermodel;
};

// COUNTERWORK (from a dual proof of f) against a machine agent: the limit node's
// formula must be instable, and the environment must win the run under the limit's
// falsifying model. The machine first plays under `itp`, then again under the
// countermodel it was refuted by.
inline CounterCheck counter_check(const Formula& f, const std::shared_ptr<AnnotatedTree>& tree, AgentKind machine,
                                  std::uint64_t seed, const Model& start, int switch_budget = 3,
                                  std::size_t budget = 400) {
  CounterCheck out;
  Model model = start;
  for (const auto& a : atoms(f)) model.emplace(a.name, false);
  for (int round = 0; round < 2; ++round) {
    Interpretation itp{model, {}};
    GameSpec g = interpret(f, itp);
    ProofAgent cw(tree, Player::Environment);
    auto m = make_agent(machine, g, Player::Machine, seed + static_cast<std::uint64_t>(round), switch_budget);
    out.match = run_match(g, *m, cw, budget);
    if (!cw.anomalies().empty()) {
      out.reason = "agent anomaly: " + cw.anomalies().front();
      return out;
    }
    if (out.match.illegal && out.match.offender == Player::Environment) {
      out.reason = "counterstrategy moved illegally: " + out.match.note;
      return out;
    }
    if (!out.match.limit) {
      out.reason = "no limit node";
      return out;
    }
    const Formula& lf = tree->node(*out.match.limit).proof->conclusion;
    if (!is_quasielementary(lf) || is_stable(lf)) {
      out.reason = "limit formula " + print(lf) + " is not instable";
      return out;
    }
    TruthVerdict tv = tautology_or_countermodel(elementarize(lf));
    Model cm = tv.countermodel;
    for (const auto& a : atoms(f)) cm.emplace(a.name, model.count(a.name) ? model.at(a.name) : false);
    out.countermodel = cm;
    Player w = outcome(interpret(f, Interpretation{cm, {}}), out.match.run);
    if (w != Player::Environment) {
      out.reason = "machine wins " + run_text(out.match.run) + " under the countermodel of " + print(lf);
      return out;
    }
    model = cm;
  }
  out.ok = true;
  return out;
}

}  // namespace cl13
