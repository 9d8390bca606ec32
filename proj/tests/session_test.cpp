#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "cl13/corpus.hpp"
#include "cl13/session.hpp"

using namespace cl13;

namespace {

const char* kApproxIntersection = "((p %& ~p) | (q %& ~q)) | ((~p | ~q) %| (p & q))";

json create_body(const std::string& formula, json itp, json extra = json::object()) {
  json b = extra;
  b["formula"] = formula;
  b["interpretation"] = std::move(itp);
  return b;
}

HttpResponse post_move(SessionService& svc, const std::string& id, const std::string& move) {
  return svc.handle("POST", "/session/" + id + "/move", json{{"move", move}}.dump());
}

const json* node_at(const json& view, const std::string& path) {
  for (const auto& n : view["nodes"])
    if (n["path"] == path) return &n;
  return nullptr;
}

// Replays the recorded run and compares with the reported verdict.
void expect_consistent(const json& view, const Interpretation& itp) {
  GameSpec g = interpret(parse(view["formula"].get<std::string>()), itp);
  cl13::Run r = parse_run(view["run_text"].get<std::string>());
  ASSERT_TRUE(legal(g, r).legal) << view["run_text"];
  EXPECT_EQ(view["current_winner"], std::string(player_name(winner(g, r))));
  if (view["finished"].get<bool>()) {
    EXPECT_EQ(view["winner"], std::string(player_name(winner(g, r))));
  }
}

}  // namespace

TEST(Session, CreateShowsDefaultActiveComponents) {
  SessionService svc;
  auto r = svc.handle("POST", "/session", create_body(kApproxIntersection, {{"p", true}, {"q", false}}).dump());
  ASSERT_EQ(r.status, 201) << r.body.dump();
  EXPECT_EQ(r.body["human"], "Environment");
  EXPECT_EQ(r.body["agent"], "work");
  for (const char* p : {"1.1", "1.2"}) {
    const json* n = node_at(r.body, p);
    ASSERT_TRUE(n) << p;
    EXPECT_EQ((*n)["kind"], "TogAnd");
    EXPECT_EQ((*n)["active"], 1);
    EXPECT_EQ((*n)["owner"], "Environment");
  }
  EXPECT_FALSE(r.body["finished"].get<bool>());
  EXPECT_TRUE(r.body["winner"].is_null());
  EXPECT_EQ(svc.size(), 1u);
}

TEST(Session, IllegalMoveIs422) {
  SessionService svc;
  auto r = svc.handle("POST", "/session", create_body(kApproxIntersection, {{"p", true}, {"q", true}}).dump());
  std::string id = r.body["id"];
  std::size_t before = r.body["run"].size();
  auto bad = post_move(svc, id, "2.1");  // the toggling disjunction's switch belongs to the machine
  EXPECT_EQ(bad.status, 422);
  EXPECT_EQ(bad.body["error"].get<std::string>().rfind("IllegalAt " + std::to_string(before) + ":", 0), 0u)
      << bad.body["error"];
  EXPECT_EQ(bad.body["run"].size(), before);
  EXPECT_EQ(post_move(svc, id, "7").status, 422);
  EXPECT_EQ(post_move(svc, id, "1.1.1.1").status, 422);
}

TEST(Session, PlayToTheEnd) {
  SessionService svc;
  Interpretation itp{{{"p", false}, {"q", true}}, {}};
  auto r = svc.handle("POST", "/session", create_body(kApproxIntersection, {{"p", false}, {"q", true}}).dump());
  std::string id = r.body["id"];
  for (const char* m : {"1.1.2", "1.2.2"}) {
    auto s = post_move(svc, id, m);
    ASSERT_EQ(s.status, 200) << s.body.dump();
    expect_consistent(s.body, itp);
  }
  HttpResponse s;
  for (int i = 0; i < 3 && !(s.body.contains("finished") && s.body["finished"].get<bool>()); ++i)
    s = post_move(svc, id, "pass");
  ASSERT_TRUE(s.body["finished"].get<bool>());
  EXPECT_EQ(s.body["winner"], "Machine");
  expect_consistent(s.body, itp);
  EXPECT_EQ(post_move(svc, id, "pass").status, 409);
  EXPECT_EQ(svc.handle("GET", "/session/" + id, "").body["finished"], true);
}

TEST(Session, LegalEndpoint) {
  SessionService svc;
  auto r = svc.handle("POST", "/session", create_body(kApproxIntersection, {{"p", true}, {"q", true}}).dump());
  ASSERT_EQ(r.status, 201) << r.body.dump();
  auto l = svc.handle("GET", "/session/" + r.body["id"].get<std::string>() + "/legal", "");
  ASSERT_EQ(l.status, 200);
  EXPECT_EQ(l.body["legal"], (json{"1.1.1", "1.1.2", "1.2.1", "1.2.2"}));
  EXPECT_EQ(l.body["legal"], r.body["legal"]);
}

TEST(Session, Errors) {
  SessionService svc;
  EXPECT_EQ(svc.handle("GET", "/session/nope", "").status, 404);
  EXPECT_EQ(svc.handle("GET", "/other", "").status, 404);
  EXPECT_EQ(svc.handle("GET", "/session", "").status, 405);
  EXPECT_EQ(svc.handle("POST", "/session", "{").status, 400);
  EXPECT_EQ(svc.handle("POST", "/session", "{}").status, 400);
  EXPECT_EQ(svc.handle("POST", "/session", create_body("p &", {{"p", true}}).dump()).status, 400);
  // No winning strategy to play.
  EXPECT_EQ(svc.handle("POST", "/session", create_body("~p %| p", {{"p", true}}).dump()).status, 400);
  // Interpretation must cover every atom.
  EXPECT_EQ(svc.handle("POST", "/session", create_body("~p | p", json::object()).dump()).status, 400);
  EXPECT_EQ(svc.handle("POST", "/session", create_body("~p | p", {{"p", true}}, {{"budget", 0}}).dump()).status,
            400);
  EXPECT_EQ(svc.handle("POST", "/session", create_body("~p | p", {{"p", json::array()}}).dump()).status, 400);

  auto r = svc.handle("POST", "/session", create_body("~p | p", {{"p", true}}).dump());
  ASSERT_EQ(r.status, 201);
  std::string id = r.body["id"];
  EXPECT_EQ(svc.handle("POST", "/session/" + id + "/move", "{\"mv\": 1}").status, 400);
  EXPECT_EQ(post_move(svc, id, "x.y").status, 400);
  EXPECT_EQ(svc.handle("DELETE", "/session/" + id, "").status, 404);
  EXPECT_EQ(svc.size(), 1u);
}

TEST(Session, InterpretationForms) {
  SessionService svc;
  auto text = svc.handle("POST", "/session",
                         json{{"formula", "(~p %| ~Q) | (p $& Q)"}, {"interpretation", "p = true\nQ = 1 !& 0\n"}}.dump());
  ASSERT_EQ(text.status, 201) << text.body.dump();
  EXPECT_EQ(text.body["game"], "(0 %| (0 !| 1)) | (1 $& (1 !& 0))");
  auto obj = svc.handle("POST", "/session", create_body("(~p %| ~Q) | (p $& Q)", {{"p", 1}, {"Q", "1 !& 0"}}).dump());
  ASSERT_EQ(obj.status, 201) << obj.body.dump();
  EXPECT_EQ(obj.body["game"], text.body["game"]);
}

TEST(Session, CounterMode) {
  SessionService svc;
  auto r = svc.handle("POST", "/session", create_body("~p %| p", {{"p", false}}, {{"counter", true}}).dump());
  ASSERT_EQ(r.status, 201) << r.body.dump();
  EXPECT_EQ(r.body["human"], "Machine");
  EXPECT_EQ(r.body["agent"], "counterwork");
  std::string id = r.body["id"];
  ASSERT_EQ(post_move(svc, id, "2").status, 200);
  HttpResponse s;
  for (int i = 0; i < 3 && !(s.body.contains("finished") && s.body["finished"].get<bool>()); ++i)
    s = post_move(svc, id, "pass");
  ASSERT_TRUE(s.body["finished"].get<bool>());
  EXPECT_EQ(s.body["winner"], "Environment");
  expect_consistent(s.body, Interpretation{{{"p", false}}, {}});

  // A CL14 theorem has no counterstrategy.
  EXPECT_EQ(svc.handle("POST", "/session", create_body("~p | p", {{"p", false}}, {{"counter", true}}).dump()).status,
            400);
}

TEST(Session, BudgetEndsTheSession) {
  SessionService svc;
  auto r = svc.handle("POST", "/session", create_body(kApproxIntersection, {{"p", true}, {"q", true}}, {{"budget", 2}}).dump());
  ASSERT_EQ(r.status, 201);
  ASSERT_EQ(r.body["run"].size(), 1u);
  std::string id = r.body["id"];
  auto s = post_move(svc, id, "1.1.2");
  EXPECT_TRUE(s.body["finished"].get<bool>()) << s.body.dump();
  EXPECT_EQ(post_move(svc, id, "1.2.2").status, 409);
}

TEST(Session, SessionLimit) {
  SessionOptions o;
  o.max_sessions = 2;
  SessionService svc(o);
  auto body = create_body("~p | p", {{"p", true}}).dump();
  EXPECT_EQ(svc.handle("POST", "/session", body).status, 201);
  EXPECT_EQ(svc.handle("POST", "/session", body).status, 201);
  EXPECT_EQ(svc.handle("POST", "/session", body).status, 503);
}

TEST(Session, TranscriptsArePersisted) {
  auto dir = std::filesystem::temp_directory_path() / "cl13_session_test";
  std::filesystem::remove_all(dir);
  SessionOptions o;
  o.transcript_dir = dir.string();
  SessionService svc(o);
  auto r = svc.handle("POST", "/session", create_body("~p | p", {{"p", true}}).dump());
  std::string id = r.body["id"];
  while (post_move(svc, id, "pass").status == 200) {
  }
  std::ifstream in(dir / (id + ".transcript"));
  ASSERT_TRUE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str().rfind("cl13-transcript v1\n", 0), 0u);
  EXPECT_NE(ss.str().find("environment: human"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Session, RandomHumansNeverBeatWork) {
  std::mt19937_64 rng(17);
  int played = 0;
  SessionService svc;
  std::vector<CorpusEntry> entries;
  for (int round = 0; round < 4; ++round) entries.insert(entries.end(), corpus().begin(), corpus().end());
  for (const auto& e : entries) {
    if (!e.provable || !*e.provable) continue;
    Formula f = parse(e.text);
    if (!is_elementary_base(f)) continue;
    json itp = json::object();
    Interpretation ref;
    for (const auto& a : atoms(f)) {
      bool v = std::bernoulli_distribution(0.5)(rng);
      itp[a.name] = v;
      ref.elem[a.name] = v;
    }
    auto r = svc.handle("POST", "/session", create_body(e.text, itp).dump());
    ASSERT_EQ(r.status, 201) << e.id << r.body.dump();
    std::string id = r.body["id"];
    json view = r.body;
    for (int step = 0; step < 40 && !view["finished"].get<bool>(); ++step) {
      const auto& legal = view["legal"];
      std::string m = "pass";
      if (!legal.empty() && std::bernoulli_distribution(0.7)(rng))
        m = legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(rng)];
      auto s = post_move(svc, id, m);
      ASSERT_EQ(s.status, 200) << e.id << " " << m << " " << s.body.dump();
      view = s.body;
      expect_consistent(view, ref);
    }
    while (!view["finished"].get<bool>()) view = post_move(svc, id, "pass").body;
    EXPECT_EQ(view["winner"], "Machine") << e.id << " " << view["run_text"];
    ++played;
  }
  EXPECT_GT(played, 10);
}

TEST(Session, ConcurrentSessions) {
  SessionService svc;
  std::vector<std::thread> pool;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&] {
      auto r = svc.handle("POST", "/session", create_body(kApproxIntersection, {{"p", true}, {"q", true}}).dump());
      if (r.status != 201) return;
      std::string id = r.body["id"];
      for (int i = 0; i < 4; ++i) post_move(svc, id, "pass");
      if (svc.handle("GET", "/session/" + id, "").body["winner"] == "Machine") ++ok;
    });
  }
  for (auto& th : pool) th.join();
  EXPECT_EQ(ok.load(), 4);
  EXPECT_EQ(svc.size(), 4u);
}

TEST(Decide, Deterministic) {
  for (const auto& e : corpus()) {
    auto a = decide_cl13(parse(e.text)), b = decide_cl13(parse(e.text));
    EXPECT_EQ(a.provable, b.provable);
    EXPECT_EQ(a.subgoals, b.subgoals);
    if (a.proof) {
      EXPECT_EQ(write_proof(a.proof), write_proof(b.proof)) << e.id;
    }
  }
}
