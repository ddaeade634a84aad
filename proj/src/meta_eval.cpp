#include "typescore/meta_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "typescore/errors.hpp"
#include "typescore/stats.hpp"

namespace typescore::meta_eval {
namespace {

constexpr std::array<std::string_view, 3> kQuestionIds = {"text_fidelity", "style_fidelity", "overall"};
constexpr std::array<std::string_view, 3> kQuestionLabels = {"Text Fidelity", "Style Fidelity",
                                                             "Overall Prefer."};
constexpr std::array<std::string_view, 3> kAnswerNames = {"LEFT", "RIGHT", "TIE"};
constexpr std::array<std::string_view, 5> kLabelNames = {"LEFT", "RIGHT", "TIE", "UNRESOLVED", "PENDING"};
constexpr std::array<std::string_view, 3> kStatusNames = {"OPEN", "RESOLVED", "UNRESOLVED"};

template <class Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

Label to_label(Answer a) { return static_cast<Label>(static_cast<int>(a)); }

io::Json side_json(const Side& s) {
  io::Json j = io::Json::object();
  j["model_id"] = s.model_id;
  j["image_id"] = s.image_id;
  if (!s.path.empty()) j["path"] = s.path;
  return j;
}

Side side_from_json(const io::Json& record, const char* field, std::size_t line) {
  const auto it = record.find(field);
  if (it == record.end() || !it->is_object()) {
    throw ParseError(std::string("missing object field '") + field + "'", line);
  }
  Side s;
  s.model_id = io::require_string(*it, "model_id", line);
  s.image_id = io::require_string(*it, "image_id", line);
  if (it->contains("path")) s.path = io::require_string(*it, "path", line);
  return s;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

}  // namespace

std::string_view question_id(Question q) { return kQuestionIds[static_cast<std::size_t>(q)]; }
std::optional<Question> parse_question(std::string_view id) { return lookup<Question>(kQuestionIds, id); }
std::string_view answer_name(Answer a) { return kAnswerNames[static_cast<std::size_t>(a)]; }
std::optional<Answer> parse_answer(std::string_view name) { return lookup<Answer>(kAnswerNames, name); }
std::string_view label_name(Label l) { return kLabelNames[static_cast<std::size_t>(l)]; }
std::optional<Label> parse_label(std::string_view name) { return lookup<Label>(kLabelNames, name); }
std::string_view status_name(TaskStatus s) { return kStatusNames[static_cast<std::size_t>(s)]; }
std::optional<TaskStatus> parse_status(std::string_view name) {
  return lookup<TaskStatus>(kStatusNames, name);
}

Verdict aggregate_votes(std::span<const Answer> votes) {
  if (votes.size() < kMinJudges) {
    throw TooFewJudgments("need at least 3 judgments, got " + std::to_string(votes.size()));
  }
  const std::size_t usable = std::min(votes.size(), kMaxJudges);
  std::array<std::size_t, 3> counts{};
  for (std::size_t k = 0; k < usable; ++k) {
    ++counts[static_cast<std::size_t>(votes[k])];
    const std::size_t seen = k + 1;
    if (seen < kMinJudges) continue;
    for (std::size_t a = 0; a < counts.size(); ++a) {
      // share >= 60%, in integers: count / seen >= 3 / 5
      if (counts[a] * 5 >= seen * 3) return {to_label(static_cast<Answer>(a)), seen};
    }
  }
  return {usable == kMaxJudges ? Label::Unresolved : Label::Pending, usable};
}

std::map<Question, Verdict> aggregate_judgments(std::span<const Judgment> judgments) {
  std::map<Question, Verdict> out;
  for (Question q : kQuestions) {
    std::vector<Answer> votes;
    votes.reserve(judgments.size());
    for (const auto& j : judgments) {
      const auto it = j.answers.find(q);
      if (it == j.answers.end()) {
        throw ValidationError("judgment by '" + j.rater_id + "' on '" + j.pair_id + "' lacks an answer for " +
                              std::string(question_id(q)));
      }
      votes.push_back(it->second);
    }
    out[q] = aggregate_votes(votes);
  }
  return out;
}

TaskStatus task_status(const std::map<Question, Verdict>& verdicts) {
  bool all_won = true;
  for (const auto& [q, v] : verdicts) {
    if (v.label == Label::Pending) return TaskStatus::Open;
    if (v.label == Label::Unresolved) all_won = false;
  }
  return all_won ? TaskStatus::Resolved : TaskStatus::Unresolved;
}

double pair_agreement(Label human, double left_score, double right_score) {
  if (left_score == right_score) return 0.5;
  const Label metric = left_score > right_score ? Label::Left : Label::Right;
  return metric == human ? 1.0 : 0.0;
}

AccuracyResult alignment_accuracy(const std::vector<PreferencePair>& pairs, const ScoreTable& scores,
                                  Question question, const AccuracyOptions& options) {
  AccuracyResult result;
  std::vector<double> agreements;
  std::map<std::pair<std::string, std::string>, std::vector<double>> by_models;

  auto score_of = [&](const Side& side, const std::string& pair_id) {
    const auto it = scores.find({side.model_id, side.image_id});
    if (it == scores.end()) {
      throw MissingScore("no score for (" + side.model_id + ", " + side.image_id + ") in pair '" +
                         pair_id + "'");
    }
    return it->second;
  };

  for (const auto& pair : pairs) {
    const auto it = pair.human_label.find(question);
    const Label human = it == pair.human_label.end() ? Label::Pending : it->second;
    if (human != Label::Left && human != Label::Right) {
      ++result.n_excluded;
      continue;
    }
    const double a = pair_agreement(human, score_of(pair.left, pair.pair_id),
                                    score_of(pair.right, pair.pair_id));
    agreements.push_back(a);
    auto key = std::minmax(pair.left.model_id, pair.right.model_id);
    by_models[{key.first, key.second}].push_back(a);
  }
  if (agreements.empty()) throw NoUsablePairs("every pair is tied or unresolved for this question");

  result.n_pairs = agreements.size();
  result.accuracy = stats::mean_sem(agreements).mean;
  result.sem = stats::bootstrap_sem(agreements, options.resamples, options.seed);
  double sum = 0;
  for (const auto& [models, values] : by_models) {
    const double mean = stats::mean_sem(values).mean;
    result.per_model_pair[models] = mean;
    sum += mean;
  }
  result.model_pair_mean = sum / static_cast<double>(by_models.size());
  return result;
}

std::map<std::string, ScoreTable> parse_external_scores(std::string_view text) {
  std::map<std::string, ScoreTable> out;
  io::for_each_record_in(text, [&](const io::Json& record, std::size_t line) {
    const auto model = io::require_string(record, "model_id", line);
    const auto image = io::require_string(record, "image_id", line);
    const auto metric = io::require_string(record, "metric_name", line);
    const double value = io::require_number(record, "value", line);
    if (!out[metric].emplace(ScoreKey{model, image}, value).second) {
      throw DuplicateKey("duplicate score for (" + model + ", " + image + ", " + metric + ") at line " +
                         std::to_string(line));
    }
  });
  return out;
}

std::map<std::string, ScoreTable> ingest_external_scores(const std::filesystem::path& path) {
  return parse_external_scores(io::read_file(path));
}

std::map<std::string, ScoreTable> score_tables_from_report(const pipeline::MetricReport& report) {
  std::map<std::string, ScoreTable> out;
  for (const auto& row : report.rows) {
    for (const auto& [kind, value] : row.scores) {
      out[std::string(metrics::metric_id(kind))][{report.model_id, row.image_id}] = value;
    }
  }
  return out;
}

io::Json pair_to_json(const PreferencePair& pair) {
  io::Json r = io::Json::object();
  r["pair_id"] = pair.pair_id;
  r["instruction_id"] = pair.instruction_id;
  r["left"] = side_json(pair.left);
  r["right"] = side_json(pair.right);
  r["status"] = status_name(pair.status);
  r["judgments"] = pair.judgments;
  io::Json labels = io::Json::object();
  for (Question q : kQuestions) {
    const auto it = pair.human_label.find(q);
    labels[std::string(question_id(q))] = label_name(it == pair.human_label.end() ? Label::Pending : it->second);
  }
  r["human_label"] = std::move(labels);
  return r;
}

PreferencePair pair_from_json(const io::Json& record, std::size_t line) {
  PreferencePair pair;
  pair.pair_id = io::require_string(record, "pair_id", line);
  pair.instruction_id = io::require_string(record, "instruction_id", line);
  pair.left = side_from_json(record, "left", line);
  pair.right = side_from_json(record, "right", line);
  if (pair.left.model_id == pair.right.model_id) {
    throw ValidationError("pair '" + pair.pair_id + "' compares model '" + pair.left.model_id +
                          "' with itself (line " + std::to_string(line) + ")");
  }
  if (record.contains("status")) {
    const auto s = parse_status(io::require_string(record, "status", line));
    if (!s) throw ParseError("unknown status", line);
    pair.status = *s;
  }
  if (const auto it = record.find("judgments"); it != record.end()) {
    if (!it->is_number_unsigned()) throw ParseError("'judgments' must be a count", line);
    pair.judgments = it->get<std::size_t>();
  }
  for (Question q : kQuestions) pair.human_label[q] = Label::Pending;
  if (const auto it = record.find("human_label"); it != record.end()) {
    if (!it->is_object()) throw ParseError("'human_label' must be an object", line);
    for (const auto& [key, value] : it->items()) {
      const auto q = parse_question(key);
      if (!q) throw ParseError("unknown question '" + key + "'", line);
      if (!value.is_string()) throw ParseError("labels must be strings", line);
      const auto l = parse_label(value.get<std::string>());
      if (!l) throw ParseError("unknown label '" + value.get<std::string>() + "'", line);
      pair.human_label[*q] = *l;
    }
  }
  return pair;
}

std::vector<PreferencePair> parse_annotations(std::string_view text) {
  std::vector<PreferencePair> out;
  std::set<std::string> seen;
  io::for_each_record_in(text, [&](const io::Json& record, std::size_t line) {
    auto pair = pair_from_json(record, line);
    if (!seen.insert(pair.pair_id).second) {
      throw ValidationError("duplicate pair_id '" + pair.pair_id + "' (line " + std::to_string(line) + ")");
    }
    out.push_back(std::move(pair));
  });
  return out;
}

std::vector<PreferencePair> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(io::read_file(path));
}

std::string serialize_annotations(const std::vector<PreferencePair>& pairs) {
  std::vector<io::Json> records;
  records.reserve(pairs.size());
  for (const auto& p : pairs) records.push_back(pair_to_json(p));
  return io::to_jsonl(records);
}

double extra_judge_fraction(const std::vector<PreferencePair>& pairs) {
  std::size_t settled = 0;
  std::size_t extra = 0;
  for (const auto& p : pairs) {
    if (p.status == TaskStatus::Open) continue;
    ++settled;
    if (p.judgments > kMinJudges) ++extra;
  }
  return settled == 0 ? 0.0 : static_cast<double>(extra) / static_cast<double>(settled);
}

std::vector<AccuracyTableRow> accuracy_table(const std::vector<PreferencePair>& pairs,
                                             const std::map<std::string, ScoreTable>& tables,
                                             const AccuracyOptions& options) {
  std::vector<AccuracyTableRow> rows;
  for (const auto& [name, table] : tables) {
    AccuracyTableRow row;
    row.metric_name = name;
    for (Question q : kQuestions) {
      try {
        row.by_question[q] = alignment_accuracy(pairs, table, q, options);
      } catch (const NoUsablePairs&) {
        row.by_question[q] = std::nullopt;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

io::Json accuracy_table_to_json(const std::vector<AccuracyTableRow>& rows) {
  io::Json doc = io::Json::array();
  for (const auto& row : rows) {
    io::Json r = io::Json::object();
    r["metric"] = row.metric_name;
    for (Question q : kQuestions) {
      const auto& result = row.by_question.at(q);
      if (!result) {
        r[std::string(question_id(q))] = nullptr;
        continue;
      }
      io::Json cell = io::Json::object();
      cell["accuracy"] = result->accuracy;
      cell["sem"] = result->sem;
      cell["n_pairs"] = result->n_pairs;
      cell["n_excluded"] = result->n_excluded;
      cell["model_pair_mean"] = result->model_pair_mean;
      io::Json per = io::Json::array();
      for (const auto& [models, acc] : result->per_model_pair) {
        per.push_back({{"models", {models.first, models.second}}, {"accuracy", acc}});
      }
      cell["per_model_pair"] = std::move(per);
      r[std::string(question_id(q))] = std::move(cell);
    }
    doc.push_back(std::move(r));
  }
  return doc;
}

std::string render_accuracy_table(const std::vector<AccuracyTableRow>& rows) {
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::string out = pad("Alignment Accuracy", 20);
  for (Question q : kQuestions) out += " | " + pad(std::string(kQuestionLabels[static_cast<std::size_t>(q)]), 30);
  out += '\n';
  for (const auto& row : rows) {
    out += pad(row.metric_name, 20);
    for (Question q : kQuestions) {
      const auto& r = row.by_question.at(q);
      std::string cell = "n/a";
      if (r) {
        cell = percent(r->accuracy) + " ± " + percent(r->sem) + " (pairs-avg " + percent(r->model_pair_mean) + ")";
      }
      out += " | " + pad(cell, 31);
    }
    out += '\n';
  }
  return out;
}

}  // namespace typescore::meta_eval
