#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "prover.hpp"
#include "semantics.hpp"
#include "strategy.hpp"

namespace cl13 {

using json = nlohmann::json;

struct HttpResponse {
  int status = 200;
  json body;
};

// One play between a human and a proof-driven agent. Not thread-safe by itself; the
// service serializes access per session.
class Session {
 public:
  Session(std::string id, Formula f, Interpretation itp, std::size_t budget, bool counter)
      : id_(std::move(id)), formula_(std::move(f)), itp_(std::move(itp)), game_(interpret(formula_, itp_)),
        tracker_(game_.tree), budget_(budget), human_(counter ? Player::Machine : Player::Environment) {
    if (counter) {
      if (!is_elementary_base(formula_)) throw std::invalid_argument("--counter needs an elementary-base formula");
      Verdict v = decide_cl14bar(formula_);
      if (!v.provable) throw std::invalid_argument("formula is CL14-provable; no counterstrategy exists");
      tree_ = std::make_shared<AnnotatedTree>(v.proof);
      agent_ = counterwork_agent(tree_);
    } else {
      Verdict v = decide_cl13(formula_);
      if (!v.provable) throw std::invalid_argument("formula is not CL13-provable; no winning strategy exists");
      tree_ = std::make_shared<AnnotatedTree>(v.proof);
      agent_ = work_agent(tree_);
    }
    if (human_ == Player::Environment) agent_turn();
  }

  const std::string& id() const { return id_; }
  bool finished() const { return finished_; }
  const Run& run() const { return run_; }
  Player human() const { return human_; }

  // Human move (nullopt = pass). Returns an error description for illegal moves.
  std::optional<std::string> play(const std::optional<Move>& m) {
    if (m) {
      Tracker probe = tracker_;
      Resolution r = probe.apply({human_, *m});
      if (r.kind == Resolution::Kind::Inner) r.why = "move inside a constant leaf";
      if (r.kind == Resolution::Kind::Illegal || r.kind == Resolution::Kind::Inner)
        return "IllegalAt " + std::to_string(run_.size()) + ": " + m->text() + " (" + r.why + ")";
      tracker_ = std::move(probe);
      run_.push_back({human_, *m});
      passes_ = 0;
      if (run_.size() >= budget_) {
        finish();
        return std::nullopt;
      }
    } else if (++passes_ >= 2) {
      finish();
      return std::nullopt;
    }
    agent_turn();
    return std::nullopt;
  }

  std::vector<Move> legal() const {
    if (finished_) return {};
    return legal_moves(tracker_, human_);
  }

  json view() const {
    json v;
    v["id"] = id_;
    v["formula"] = print(formula_);
    v["game"] = print(game_.tree);
    v["human"] = std::string(player_name(human_));
    v["agent"] = agent_->name();
    json nodes = json::array();
    const Shape& sh = tracker_.shape();
    for (std::size_t i = 0; i < sh.size(); ++i) {
      const auto& n = sh.node(static_cast<int>(i));
      json j;
      j["id"] = i;
      j["path"] = path_text(n.path);
      j["parent"] = n.parent;
      j["children"] = n.kids;
      const NodeState& ns = tracker_.state(static_cast<int>(i));
      if (n.f.is_nary()) {
        Connective c = n.f.connective();
        j["kind"] = std::string(connective_name(c));
        j["token"] = std::string(token(c));
        j["owner"] = is_parallel(c) ? json(nullptr) : json(std::string(player_name(owner(c))));
        if (is_choice(c)) {
          j["chosen"] = ns.chosen ? json(ns.chosen) : json(nullptr);
        } else if (!is_parallel(c)) {
          j["active"] = ns.active;
          j["switches"] = ns.switches;
        }
      } else {
        j["kind"] = n.f.is_top() ? "Top" : "Bot";
      }
      j["live"] = live(static_cast<int>(i));
      nodes.push_back(std::move(j));
    }
    v["nodes"] = std::move(nodes);
    json run = json::array();
    for (const auto& lm : run_) run.push_back({{"by", std::string(1, player_char(lm.by))}, {"move", lm.move.text()}});
    v["run"] = std::move(run);
    v["run_text"] = run_text(run_);
    json lm = json::array();
    for (const auto& m : legal()) lm.push_back(m.text());
    v["legal"] = std::move(lm);
    v["finished"] = finished_;
    v["winner"] = finished_ ? json(std::string(player_name(winner_))) : json(nullptr);
    v["current_winner"] = std::string(player_name(winner_of_state(tracker_)));
    v["budget"] = budget_;
    v["passes"] = passes_;
    if (!note_.empty()) v["note"] = note_;
    v["trace"] = agent_->trace() ? *agent_->trace() : std::vector<int>{};
    return v;
  }

  std::string transcript() const {
    MatchResult r;
    r.run = run_;
    r.winner = winner_;
    if (agent_->trace()) {
      r.trace = *agent_->trace();
      if (!r.trace.empty()) r.limit = limit_node(r.trace, *tree_);
    }
    TranscriptHeader h{print(formula_), interpretation_text(itp_),
                       human_ == Player::Machine ? "human" : agent_->name(),
                       human_ == Player::Environment ? "human" : agent_->name(), 0, budget_};
    return transcript_text(h, r);
  }

 private:
  std::string id_;
  Formula formula_;
  Interpretation itp_;
  GameSpec game_;
  Tracker tracker_;
  std::size_t budget_;
  Player human_;
  std::shared_ptr<AnnotatedTree> tree_;
  std::shared_ptr<ProofAgent> agent_;
  Run run_;
  int passes_ = 0;
  bool finished_ = false;
  Player winner_ = Player::Machine;
  std::string note_;

  // Not inside an unchosen component of a made choice, nor left of a sequential's
  // active component.
  bool live(int node) const {
    const Shape& sh = tracker_.shape();
    int child = node;
    for (int p = sh.node(node).parent; p >= 0; child = p, p = sh.node(p).parent) {
      const Formula& f = sh.node(p).f;
      const NodeState& ns = tracker_.state(p);
      const int k = sh.node(child).path.back();
      if (is_choice(f.connective()) && ns.chosen && ns.chosen != k) return false;
      if (is_sequential(f.connective()) && k < ns.active) return false;
    }
    return true;
  }

  void finish() {
    finished_ = true;
    winner_ = winner(game_, run_);
  }

  void agent_turn() {
    std::vector<Move> ms = agent_->act(run_);
    if (ms.empty()) {
      if (++passes_ >= 2) finish();
      return;
    }
    passes_ = 0;
    for (const auto& m : ms) {
      if (run_.size() >= budget_) break;
      LabMove lm{opponent(human_), m};
      Resolution r = tracker_.apply(lm);
      run_.push_back(lm);
      if (r.kind == Resolution::Kind::Illegal || r.kind == Resolution::Kind::Inner) {
        note_ = "agent move " + m.text() + " illegal: " + r.why;
        finished_ = true;
        winner_ = human_;
        return;
      }
    }
    if (run_.size() >= budget_) finish();
  }
};

struct SessionOptions {
  std::size_t default_budget = 200;
  std::size_t max_budget = 10000;
  std::size_t max_sessions = 1000;
  std::string transcript_dir;  // empty = no persistence
};

// Routes:
//   POST /session                 {"formula", "interpretation", "budget"?, "counter"?}
//   GET  /session/{id}
//   POST /session/{id}/move       {"move": "2.1"} or {"move": "pass"}
//   GET  /session/{id}/legal
class SessionService {
 public:
  explicit SessionService(SessionOptions o = {}) : o_(std::move(o)), rng_(std::random_device{}()) {}

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    for (std::string seg; std::getline(ss, seg, '/');)
      if (!seg.empty()) parts.push_back(seg);
    if (parts.empty() || parts[0] != "session") return error(404, "no such route");
    if (parts.size() == 1) {
      if (method != "POST") return error(405, "use POST /session");
      return create(body);
    }
    auto s = find(parts[1]);
    if (!s) return error(404, "unknown session " + parts[1]);
    std::lock_guard<std::mutex> lk(s->mu);
    if (parts.size() == 2 && method == "GET") return {200, s->session->view()};
    if (parts.size() == 3 && parts[2] == "legal" && method == "GET") {
      json l = json::array();
      for (const auto& m : s->session->legal()) l.push_back(m.text());
      return {200, {{"legal", l}, {"finished", s->session->finished()}}};
    }
    if (parts.size() == 3 && parts[2] == "move" && method == "POST") return move(*s, body);
    return error(404, "no such route");
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lk(mu_);
    return sessions_.size();
  }

 private:
  struct Slot {
    std::mutex mu;
    std::unique_ptr<Session> session;
  };

  SessionOptions o_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::mt19937_64 rng_;

  static HttpResponse error(int status, const std::string& msg) { return {status, {{"error", msg}}}; }

  std::shared_ptr<Slot> find(const std::string& id) {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  HttpResponse create(const std::string& body) {
    json req;
    try {
      req = json::parse(body);
    } catch (const json::exception& e) {
      return error(400, std::string("malformed JSON: ") + e.what());
    }
    if (!req.is_object() || !req.contains("formula") || !req["formula"].is_string())
      return error(400, "expected {\"formula\": <text>, \"interpretation\": ...}");
    try {
      Formula f = parse(req["formula"].get<std::string>());
      Interpretation itp = read_interpretation(req.value("interpretation", json::object()));
      std::size_t budget = req.value("budget", o_.default_budget);
      if (budget == 0 || budget > o_.max_budget) return error(400, "budget out of range");
      interpret(f, itp);  // every atom must be covered
      std::string id = fresh_id();
      auto slot = std::make_shared<Slot>();
      slot->session = std::make_unique<Session>(id, f, std::move(itp), budget, req.value("counter", false));
      json v = slot->session->view();
      {
        std::lock_guard<std::mutex> lk(mu_);
        if (sessions_.size() >= o_.max_sessions) return error(503, "too many sessions");
        sessions_[id] = slot;
      }
      persist(*slot->session);
      return {201, v};
    } catch (const ParseError& e) {
      return error(400, std::string("parse error ") + e.what());
    } catch (const ResourceExhausted& e) {
      return error(503, e.what());
    } catch (const std::exception& e) {
      return error(400, e.what());
    }
  }

  HttpResponse move(Slot& s, const std::string& body) {
    if (s.session->finished()) return error(409, "session is finished");
    json req;
    try {
      req = json::parse(body);
    } catch (const json::exception& e) {
      return error(400, std::string("malformed JSON: ") + e.what());
    }
    if (!req.is_object() || !req.contains("move") || !req["move"].is_string())
      return error(400, "expected {\"move\": \"<path>\"} or {\"move\": \"pass\"}");
    std::string text = req["move"].get<std::string>();
    std::optional<Move> m;
    if (text != "pass") {
      try {
        m = Move::parse(text);
      } catch (const std::exception& e) {
        return error(400, std::string("bad move: ") + e.what());
      }
    }
    if (auto err = s.session->play(m)) {
      json b = s.session->view();
      b["error"] = *err;
      return {422, b};
    }
    persist(*s.session);
    return {200, s.session->view()};
  }

  static Interpretation read_interpretation(const json& j) {
    if (j.is_string()) return parse_interpretation(j.get<std::string>());
    if (!j.is_object()) throw std::invalid_argument("interpretation must be an object or text");
    Interpretation itp;
    for (const auto& [k, v] : j.items()) {
      if (v.is_boolean()) {
        itp.elem[k] = v.get<bool>();
      } else if (v.is_number_integer()) {
        itp.elem[k] = v.get<int>() != 0;
      } else if (v.is_string()) {
        itp.gen[k] = GameSpec::parse(v.get<std::string>());
      } else {
        throw std::invalid_argument("interpretation of " + k + " must be a boolean or a game");
      }
    }
    return itp;
  }

  std::string fresh_id() {
    std::lock_guard<std::mutex> lk(mu_);
    for (;;) {
      std::ostringstream o;
      o << std::hex << (rng_() & 0xffffffffffffULL);
      if (!sessions_.count(o.str())) return o.str();
    }
  }

  void persist(const Session& s) const {
    if (o_.transcript_dir.empty() || !s.finished()) return;
    std::filesystem::create_directories(o_.transcript_dir);
    std::ofstream(std::filesystem::path(o_.transcript_dir) / (s.id() + ".transcript")) << s.transcript();
  }
};

}  // namespace cl13
