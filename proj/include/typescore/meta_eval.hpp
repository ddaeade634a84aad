#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "typescore/jsonl.hpp"
#include "typescore/pipeline.hpp"

namespace typescore::meta_eval {

enum class Question { TextFidelity, StyleFidelity, Overall };
inline constexpr std::array<Question, 3> kQuestions = {Question::TextFidelity,
                                                       Question::StyleFidelity, Question::Overall};

// What one judge picked.
enum class Answer { Left, Right, Tie };

// Aggregated outcome. Pending means more judgments are still wanted.
enum class Label { Left, Right, Tie, Unresolved, Pending };

enum class TaskStatus { Open, Resolved, Unresolved };

std::string_view question_id(Question q);  // "text_fidelity", "style_fidelity", "overall"
std::optional<Question> parse_question(std::string_view id);
std::string_view answer_name(Answer a);  // "LEFT", "RIGHT", "TIE"
std::optional<Answer> parse_answer(std::string_view name);
std::string_view label_name(Label l);
std::optional<Label> parse_label(std::string_view name);
std::string_view status_name(TaskStatus s);
std::optional<TaskStatus> parse_status(std::string_view name);

struct Side {
  std::string model_id;
  std::string image_id;
  std::string path;  // optional, relative to the image directory
};

struct PreferencePair {
  std::string pair_id;
  std::string instruction_id;
  Side left;
  Side right;
  std::map<Question, Label> human_label;
  TaskStatus status = TaskStatus::Open;
  std::size_t judgments = 0;
};

struct Judgment {
  std::string pair_id;
  std::string rater_id;
  std::map<Question, Answer> answers;
  std::int64_t timestamp = 0;  // unix milliseconds
};

inline constexpr std::size_t kMinJudges = 3;
inline constexpr std::size_t kMaxJudges = 5;
inline constexpr double kAgreementShare = 0.6;

struct Verdict {
  Label label = Label::Pending;
  std::size_t votes_used = 0;
};

// Votes in arrival order for one question. Three votes settle on any answer
// with two of them; otherwise the fourth and fifth are added one at a time
// and an answer wins once it holds at least 60% of the votes so far. No
// winner after five is Unresolved; fewer than five without a winner is
// Pending. Votes past the fifth are ignored. Throws TooFewJudgments below 3.
Verdict aggregate_votes(std::span<const Answer> votes);

// Per-question verdicts for the judgments of one pair, in arrival order.
std::map<Question, Verdict> aggregate_judgments(std::span<const Judgment> judgments);

TaskStatus task_status(const std::map<Question, Verdict>& verdicts);

// 1 when the higher-scored side is the one humans preferred, 0.5 when the
// scores are exactly equal, 0 otherwise. `human` must be Left or Right.
double pair_agreement(Label human, double left_score, double right_score);

using ScoreKey = std::pair<std::string, std::string>;  // (model_id, image_id)
using ScoreTable = std::map<ScoreKey, double>;

struct AccuracyOptions {
  int resamples = 1000;
  std::uint64_t seed = 0;
};

struct AccuracyResult {
  double accuracy = 0;  // pooled over usable pairs
  double sem = 0;       // bootstrap over pairs
  std::size_t n_pairs = 0;
  std::size_t n_excluded = 0;
  // Mean accuracy within each unordered model pair, then averaged.
  double model_pair_mean = 0;
  std::map<std::pair<std::string, std::string>, double> per_model_pair;
};

// Pairs whose human label for `question` is not Left/Right are excluded.
// Throws MissingScore and NoUsablePairs.
AccuracyResult alignment_accuracy(const std::vector<PreferencePair>& pairs,
                                  const ScoreTable& scores, Question question,
                                  const AccuracyOptions& options = {});

// Line-delimited {model_id, image_id, metric_name, value}, grouped by metric.
std::map<std::string, ScoreTable> ingest_external_scores(const std::filesystem::path& path);
std::map<std::string, ScoreTable> parse_external_scores(std::string_view text);

// One table per metric, keyed by (report.model_id, row.image_id).
std::map<std::string, ScoreTable> score_tables_from_report(const pipeline::MetricReport& report);

// Annotation export format shared with the annotation service.
io::Json pair_to_json(const PreferencePair& pair);
PreferencePair pair_from_json(const io::Json& record, std::size_t line = 0);
std::vector<PreferencePair> parse_annotations(std::string_view text);
std::vector<PreferencePair> load_annotations(const std::filesystem::path& path);
std::string serialize_annotations(const std::vector<PreferencePair>& pairs);

// Share of settled pairs that needed more than three judges.
double extra_judge_fraction(const std::vector<PreferencePair>& pairs);

struct AccuracyTableRow {
  std::string metric_name;
  std::map<Question, std::optional<AccuracyResult>> by_question;  // nullopt: no usable pairs
};

std::vector<AccuracyTableRow> accuracy_table(const std::vector<PreferencePair>& pairs,
                                             const std::map<std::string, ScoreTable>& tables,
                                             const AccuracyOptions& options = {});
io::Json accuracy_table_to_json(const std::vector<AccuracyTableRow>& rows);
std::string render_accuracy_table(const std::vector<AccuracyTableRow>& rows);

}  // namespace typescore::meta_eval
