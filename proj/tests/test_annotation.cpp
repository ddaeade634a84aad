#include <doctest.h>

#include <memory>
#include <thread>

#include <httplib.h>

#include "support/temp_dir.hpp"
#include "typescore/annotation.hpp"
#include "typescore/errors.hpp"

using namespace typescore;
using namespace typescore::annotation;
using meta_eval::Label;

namespace {

constexpr Answer L = Answer::Left;
constexpr Answer R = Answer::Right;
constexpr Answer T = Answer::Tie;

std::vector<GoldItem> gold10() {
  std::vector<GoldItem> g;
  for (int i = 0; i < 10; ++i) g.push_back({"g" + std::to_string(i), i % 2 ? L : R});
  return g;
}

std::map<std::string, Answer> gold_answers(int correct) {
  std::map<std::string, Answer> a;
  for (int i = 0; i < 10; ++i) {
    const Answer right = i % 2 ? L : R;
    a["g" + std::to_string(i)] = i < correct ? right : T;
  }
  return a;
}

PreferencePair open_pair(std::string id) {
  PreferencePair p;
  p.pair_id = id;
  p.instruction_id = "inst-" + id;
  p.left = {"model-a", "a-" + id, ""};
  p.right = {"model-b", "b-" + id, ""};
  return p;
}

struct Fixture {
  std::int64_t clock = 1'000'000;
  std::unique_ptr<AnnotationStore> store;

  explicit Fixture(std::vector<PreferencePair> pairs, std::filesystem::path log = {}, std::uint64_t seed = 7) {
    store = std::make_unique<AnnotationStore>(config(std::move(pairs), std::move(log), seed));
  }

  StoreConfig config(std::vector<PreferencePair> pairs, std::filesystem::path log, std::uint64_t seed) {
    StoreConfig c;
    c.pairs = std::move(pairs);
    c.gold = gold10();
    c.log_path = std::move(log);
    c.seed = seed;
    c.instructions = {{"inst-p1", "A sign that says \"OPEN\""}};
    c.now_ms = [this] { return clock; };
    return c;
  }

  std::string rater(int i) {
    const std::string id = "r" + std::to_string(i);
    if (!store->rater(id)) store->qualify_rater(id, gold_answers(10));
    return id;
  }

  // Submits `canonical` (left = model-a) as seen through the served order.
  TaskState judge(const std::string& rater_id, const std::string& pair_id, Answer canonical) {
    auto task = store->next_task(rater_id);
    REQUIRE(task.pair_id == pair_id);
    const bool swapped = task.left_image_url.find("b-") != std::string::npos;
    Answer seen = canonical;
    if (swapped && canonical == L) seen = R;
    else if (swapped && canonical == R) seen = L;
    return store->submit_judgment(rater_id, pair_id,
                                  {{Question::TextFidelity, seen}, {Question::StyleFidelity, seen}, {Question::Overall, seen}});
  }
};

}  // namespace

TEST_CASE("qualification threshold") {
  Fixture f({open_pair("p1")});
  CHECK(f.store->qualify_rater("nine", gold_answers(9)).qualified);
  CHECK_FALSE(f.store->qualify_rater("eight", gold_answers(8)).qualified);
  // the first attempt is final
  CHECK_FALSE(f.store->qualify_rater("eight", gold_answers(10)).qualified);
  auto partial = gold_answers(10);
  partial.erase("g0");
  partial.erase("g1");
  CHECK_FALSE(f.store->qualify_rater("partial", partial).qualified);
}

TEST_CASE("empty gold set") {
  StoreConfig c;
  c.pairs = {open_pair("p1")};
  AnnotationStore store(std::move(c));
  CHECK_THROWS_AS(store.qualify_rater("x", {}), GoldSetMissing);
}

TEST_CASE("serving rules") {
  Fixture f({open_pair("p1")});
  CHECK_THROWS_AS(f.store->next_task("nobody"), NotQualified);
  f.store->qualify_rater("weak", gold_answers(5));
  CHECK_THROWS_AS(f.store->next_task("weak"), NotQualified);

  auto r = f.rater(1);
  auto task = f.store->next_task(r);
  CHECK(task.pair_id == "p1");
  CHECK(task.instruction == "A sign that says \"OPEN\"");
  CHECK(f.store->next_task(r).presentation_seed == task.presentation_seed);
  f.judge(r, "p1", L);
  CHECK_THROWS_AS(f.store->next_task(r), NoTasksRemaining);
}

TEST_CASE("submission errors") {
  Fixture f({open_pair("p1")});
  auto r = f.rater(1);
  const std::map<Question, Answer> all = {{Question::TextFidelity, L}, {Question::StyleFidelity, L}, {Question::Overall, L}};
  CHECK_THROWS_AS(f.store->submit_judgment(r, "nope", all), UnknownPair);
  CHECK_THROWS_AS(f.store->submit_judgment(r, "p1", all), StaleTask);
  f.store->next_task(r);
  CHECK_THROWS_AS(f.store->submit_judgment(r, "p1", {{Question::Overall, L}}), ValidationError);
  f.store->submit_judgment(r, "p1", all);
  CHECK_THROWS_AS(f.store->submit_judgment(r, "p1", all), DuplicateJudgment);
  CHECK(f.store->judgments().size() == 1);
}

TEST_CASE("expired leases are stale") {
  Fixture f({open_pair("p1")});
  auto r = f.rater(1);
  f.store->next_task(r);
  f.clock += 31 * 60 * 1000;
  CHECK_THROWS_AS(
      f.store->submit_judgment(r, "p1", {{Question::TextFidelity, L}, {Question::StyleFidelity, L}, {Question::Overall, L}}),
      StaleTask);
}

TEST_CASE("two of three resolves") {
  Fixture f({open_pair("p1")});
  f.judge(f.rater(1), "p1", L);
  f.judge(f.rater(2), "p1", R);
  auto state = f.judge(f.rater(3), "p1", L);
  CHECK(state.status == TaskStatus::Resolved);
  CHECK(state.judgments_received == 3);
  auto exported = f.store->export_annotations();
  REQUIRE(exported.size() == 1);
  CHECK(exported[0].human_label.at(Question::Overall) == Label::Left);
  CHECK(exported[0].status == TaskStatus::Resolved);
  CHECK_THROWS_AS(f.store->next_task(f.rater(4)), NoTasksRemaining);
}

TEST_CASE("a three-way split stays open and five without a winner is unresolved") {
  Fixture f({open_pair("p1")});
  f.judge(f.rater(1), "p1", L);
  f.judge(f.rater(2), "p1", R);
  auto third = f.judge(f.rater(3), "p1", T);
  CHECK(third.status == TaskStatus::Open);
  CHECK(f.store->export_annotations()[0].human_label.at(Question::Overall) == Label::Pending);
  CHECK(f.judge(f.rater(4), "p1", L).status == TaskStatus::Open);
  auto fifth = f.judge(f.rater(5), "p1", R);
  CHECK(fifth.status == TaskStatus::Unresolved);
  CHECK(f.store->export_annotations()[0].human_label.at(Question::Overall) == Label::Unresolved);
  CHECK(f.store->export_annotations()[0].judgments == 5);
}

TEST_CASE("live leases count toward the five-judge cap") {
  Fixture f({open_pair("p1")});
  for (int i = 1; i <= 5; ++i) f.store->next_task(f.rater(i));
  CHECK_THROWS_AS(f.store->next_task(f.rater(6)), NoTasksRemaining);
  f.clock += 31 * 60 * 1000;
  CHECK(f.store->next_task(f.rater(6)).pair_id == "p1");
}

TEST_CASE("de-randomization stores canonical answers") {
  // Across many seeds both presentation orders occur; the stored answer
  // always names the intended model.
  int swapped_seen = 0, straight_seen = 0;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    Fixture f({open_pair("p1")}, {}, seed);
    auto r = f.rater(1);
    auto task = f.store->next_task(r);
    const bool swapped = task.left_image_url == "/images/b-p1";
    CHECK(task.left_image_url == (swapped ? "/images/b-p1" : "/images/a-p1"));
    (swapped ? swapped_seen : straight_seen)++;
    // rater prefers model-a: clicks whichever side shows it
    const Answer click = swapped ? R : L;
    f.store->submit_judgment(r, "p1", {{Question::TextFidelity, click}, {Question::StyleFidelity, T}, {Question::Overall, click}});
    auto j = f.store->judgments().at(0);
    CHECK(j.answers.at(Question::Overall) == L);
    CHECK(j.answers.at(Question::StyleFidelity) == T);
  }
  CHECK(swapped_seen > 0);
  CHECK(straight_seen > 0);
}

TEST_CASE("state is rebuilt from the append-only log") {
  testutil::TempDir dir;
  const auto log = dir / "events.jsonl";
  std::string before;
  {
    Fixture f({open_pair("p1"), open_pair("p2")}, log);
    f.judge(f.rater(1), "p1", L);
    f.judge(f.rater(2), "p1", L);
    f.store->next_task(f.rater(3));
    before = meta_eval::serialize_annotations(f.store->export_annotations());
  }
  const std::string log_text = testutil::slurp(log);
  Fixture g({open_pair("p1"), open_pair("p2")}, log);
  CHECK(meta_eval::serialize_annotations(g.store->export_annotations()) == before);
  CHECK(g.store->judgments().size() == 2);
  CHECK(g.store->rater("r1")->qualified);
  // the rater holding a lease gets it back; previous judges cannot rejudge
  CHECK(g.store->next_task("r3").pair_id == "p1");
  CHECK(g.store->next_task("r1").pair_id == "p2");
  auto after = testutil::slurp(log);
  CHECK(after.substr(0, log_text.size()) == log_text);
  g.judge("r3", "p1", R);
  CHECK(g.store->task_state("p1").status == TaskStatus::Resolved);
}

TEST_CASE("empty store exports nothing") {
  Fixture f({});
  CHECK(f.store->export_annotations().empty());
}

TEST_CASE("http endpoints") {
  testutil::TempDir dir;
  dir.write("images/a-p1", "AAA");
  Fixture f({open_pair("p1")}, dir / "log.jsonl");
  AnnotationServer server(*f.store, {"127.0.0.1", 0, dir / "images", {}});
  const int port = server.bind();
  std::thread th([&] { server.serve(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  std::string answers = "{\"answers\": {";
  for (int i = 0; i < 10; ++i) answers += (i ? "," : "") + std::string("\"g") + std::to_string(i) + "\": \"" + (i % 2 ? "LEFT" : "RIGHT") + "\"";
  answers += "}}";

  CHECK(cli.Get("/tasks/next?rater=web")->status == 403);
  auto q = cli.Post("/raters/web/qualification", answers, "application/json");
  REQUIRE(q);
  CHECK(q->status == 200);
  CHECK(nlohmann::json::parse(q->body).at("qualified") == true);

  auto task = cli.Get("/tasks/next?rater=web");
  REQUIRE(task);
  CHECK(task->status == 200);
  auto tj = nlohmann::json::parse(task->body);
  CHECK(tj.at("pair_id") == "p1");
  CHECK(tj.at("questions").size() == 3);
  CHECK(task->body.find("model-a") == std::string::npos);
  CHECK(task->body.find("model-b") == std::string::npos);

  auto bad = cli.Post("/tasks/p1/judgments", "{\"rater_id\": \"web\"}", "application/json");
  CHECK(bad->status == 400);
  const std::string body =
      "{\"rater_id\": \"web\", \"answers\": {\"text_fidelity\": \"LEFT\", \"style_fidelity\": \"TIE\", \"overall\": \"LEFT\"}}";
  CHECK(cli.Post("/tasks/nope/judgments", body, "application/json")->status == 404);
  auto ok = cli.Post("/tasks/p1/judgments", body, "application/json");
  CHECK(ok->status == 200);
  CHECK(nlohmann::json::parse(ok->body).at("judgments_received") == 1);
  CHECK(cli.Post("/tasks/p1/judgments", body, "application/json")->status == 409);
  CHECK(cli.Get("/tasks/next?rater=web")->status == 404);

  auto exported = cli.Get("/export");
  CHECK(exported->status == 200);
  CHECK(exported->body.find("\"p1\"") != std::string::npos);

  CHECK(cli.Get("/images/a-p1")->body == "AAA");
  CHECK(cli.Get("/")->status == 200);

  server.stop();
  th.join();
}
