#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "typescore/jsonl.hpp"
#include "typescore/meta_eval.hpp"

namespace typescore::annotation {

using meta_eval::Answer;
using meta_eval::Judgment;
using meta_eval::PreferencePair;
using meta_eval::Question;
using meta_eval::TaskStatus;

// Qualification question with a known answer.
struct GoldItem {
  std::string item_id;
  Answer answer;
};

std::vector<GoldItem> load_gold_set(const std::filesystem::path& path);

inline constexpr int kQualifyNumerator = 9;  // 9/10 = 90% of the gold set
inline constexpr int kQualifyDenominator = 10;

struct RaterRecord {
  std::string rater_id;
  bool qualified = false;
  int gold_correct = 0;
  int gold_total = 0;
};

struct TaskState {
  std::string pair_id;
  std::size_t judgments_received = 0;
  TaskStatus status = TaskStatus::Open;
  std::uint64_t presentation_seed = 0;  // of the serving the caller last saw
};

struct TaskPayload {
  std::string pair_id;
  std::string instruction;
  std::string left_image_url;
  std::string right_image_url;
  std::uint64_t presentation_seed = 0;
};

io::Json payload_to_json(const TaskPayload& payload);
io::Json state_to_json(const TaskState& state);
io::Json rater_to_json(const RaterRecord& rater);

// Question wording shown to judges, keyed like the export format.
std::string_view question_prompt(Question q);

struct StoreConfig {
  std::vector<PreferencePair> pairs;              // task definitions, in serving order
  std::map<std::string, std::string> instructions;  // instruction_id -> text
  std::vector<GoldItem> gold;
  std::filesystem::path log_path;  // append-only event log; empty keeps events in memory
  std::uint64_t seed = 0;
  std::int64_t lease_ms = 30 * 60 * 1000;
  std::function<std::int64_t()> now_ms;  // defaults to the system clock
};

// Pairwise annotation state machine backed by an append-only event log.
//
// Every mutation is one appended line (qualification, serve, judgment); the
// in-memory state is rebuilt from the log on construction. A pair takes 3 to
// 5 judgments and is never served to the same rater twice. Left/right order
// is randomized per serving and undone before a judgment is stored, so the
// log holds canonical answers where Left is always pair.left.
class AnnotationStore {
 public:
  explicit AnnotationStore(StoreConfig config);
  ~AnnotationStore();
  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Scores the rater on the gold set; unanswered items count as wrong. A
  // rater's first attempt is final. Throws GoldSetMissing.
  RaterRecord qualify_rater(const std::string& rater_id,
                            const std::map<std::string, Answer>& answers);

  // Throws NotQualified and NoTasksRemaining.
  TaskPayload next_task(const std::string& rater_id);

  // `answers` are as the rater saw them. Throws UnknownPair,
  // DuplicateJudgment, StaleTask and ValidationError.
  TaskState submit_judgment(const std::string& rater_id, const std::string& pair_id,
                            const std::map<Question, Answer>& answers);

  std::vector<PreferencePair> export_annotations() const;

  std::optional<RaterRecord> rater(const std::string& rater_id) const;
  TaskState task_state(const std::string& pair_id) const;
  std::vector<Judgment> judgments() const;  // canonical, in log order

 private:
  struct Lease {
    std::uint64_t presentation_seed;
    bool swapped;
    std::int64_t expires_ms;
  };
  struct PairState {
    PreferencePair pair;
    std::vector<Judgment> judgments;
    std::map<std::string, Lease> leases;  // by rater
    std::uint64_t servings = 0;
  };

  void replay();
  void apply(const io::Json& event, bool from_log);
  void append(const io::Json& event);
  std::int64_t now() const;
  std::size_t active_leases(const PairState& p, const std::string& except_rater) const;
  PreferencePair export_pair(const PairState& p) const;

  StoreConfig config_;
  std::map<std::string, PairState> pairs_;
  std::vector<std::string> order_;
  std::map<std::string, RaterRecord> raters_;
  std::map<std::string, std::set<std::string>> judged_by_;  // rater -> pair ids
  std::vector<Judgment> log_judgments_;
  std::ofstream log_;
  mutable std::shared_mutex mutex_;
};

struct ServerOptions {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::filesystem::path images_dir;
  std::filesystem::path ui_dir;  // static bundle served at /
};

// HTTP front end for AnnotationStore:
//   POST /raters/{id}/qualification   {"answers": {item_id: "LEFT"|"RIGHT"|"TIE"}}
//   GET  /tasks/next?rater={id}
//   POST /tasks/{pair_id}/judgments   {"rater_id": ..., "answers": {question: answer}}
//   GET  /export                      line-delimited PreferencePair records
//   GET  /images/...                  read-only image directory
//   GET  /                            UI bundle
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, ServerOptions options);
  ~AnnotationServer();

  // Binds to options.port (0 picks a free port) and returns the port.
  int bind();
  // Serves until stop(); call bind() first.
  void serve();
  void stop();
  bool wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace typescore::annotation
