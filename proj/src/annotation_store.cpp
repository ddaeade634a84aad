#include <chrono>
#include <mutex>

#include "typescore/annotation.hpp"
#include "typescore/errors.hpp"
#include "typescore/rng.hpp"

namespace typescore::annotation {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Answer flip(Answer a) {
  switch (a) {
    case Answer::Left:
      return Answer::Right;
    case Answer::Right:
      return Answer::Left;
    case Answer::Tie:
      return Answer::Tie;
  }
  return a;
}

io::Json answers_json(const std::map<Question, Answer>& answers) {
  io::Json j = io::Json::object();
  for (const auto& [q, a] : answers) j[std::string(meta_eval::question_id(q))] = meta_eval::answer_name(a);
  return j;
}

std::map<Question, Answer> answers_from_json(const io::Json& j, std::size_t line) {
  std::map<Question, Answer> out;
  for (const auto& [key, value] : j.items()) {
    const auto q = meta_eval::parse_question(key);
    const auto a = value.is_string() ? meta_eval::parse_answer(value.get<std::string>()) : std::nullopt;
    if (!q || !a) throw ParseError("bad answer entry '" + key + "' in event log", line);
    out[*q] = *a;
  }
  return out;
}

}  // namespace

std::string_view question_prompt(Question q) {
  switch (q) {
    case Question::TextFidelity:
      return "Which image renders the quoted text more accurately?";
    case Question::StyleFidelity:
      return "Which image better matches the style described in the instruction?";
    case Question::Overall:
      return "Taking the rendered text, the instruction and the overall look into account, "
             "which image do you prefer?";
  }
  return "";
}

std::vector<GoldItem> load_gold_set(const std::filesystem::path& path) {
  std::vector<GoldItem> gold;
  io::for_each_record(path, [&](const io::Json& record, std::size_t line) {
    GoldItem item;
    item.item_id = io::require_string(record, "item_id", line);
    const auto a = meta_eval::parse_answer(io::require_string(record, "answer", line));
    if (!a) throw ParseError("gold answer must be LEFT, RIGHT or TIE", line);
    item.answer = *a;
    gold.push_back(std::move(item));
  });
  return gold;
}

io::Json payload_to_json(const TaskPayload& p) {
  io::Json j = io::Json::object();
  j["pair_id"] = p.pair_id;
  j["instruction"] = p.instruction;
  j["images"] = {{{"position", "LEFT"}, {"url", p.left_image_url}},
                 {{"position", "RIGHT"}, {"url", p.right_image_url}}};
  io::Json questions = io::Json::array();
  for (Question q : meta_eval::kQuestions) {
    questions.push_back({{"id", meta_eval::question_id(q)},
                         {"prompt", question_prompt(q)},
                         {"choices", {"LEFT", "TIE", "RIGHT"}}});
  }
  j["questions"] = std::move(questions);
  j["presentation_seed"] = p.presentation_seed;
  return j;
}

io::Json state_to_json(const TaskState& s) {
  io::Json j = io::Json::object();
  j["pair_id"] = s.pair_id;
  j["judgments_received"] = s.judgments_received;
  j["status"] = meta_eval::status_name(s.status);
  j["presentation_seed"] = s.presentation_seed;
  return j;
}

io::Json rater_to_json(const RaterRecord& r) {
  io::Json j = io::Json::object();
  j["rater_id"] = r.rater_id;
  j["qualified"] = r.qualified;
  j["gold_correct"] = r.gold_correct;
  j["gold_total"] = r.gold_total;
  return j;
}

AnnotationStore::AnnotationStore(StoreConfig config) : config_(std::move(config)) {
  if (!config_.now_ms) {
    config_.now_ms = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  for (const auto& pair : config_.pairs) {
    if (pairs_.contains(pair.pair_id)) throw ValidationError("duplicate pair_id '" + pair.pair_id + "'");
    if (pair.left.model_id == pair.right.model_id) {
      throw ValidationError("pair '" + pair.pair_id + "' compares a model with itself");
    }
    PairState state;
    state.pair = pair;
    state.pair.status = TaskStatus::Open;
    state.pair.judgments = 0;
    pairs_.emplace(pair.pair_id, std::move(state));
    order_.push_back(pair.pair_id);
  }
  replay();
  if (!config_.log_path.empty()) {
    log_.open(config_.log_path, std::ios::app | std::ios::binary);
    if (!log_) throw IoError("cannot open event log " + config_.log_path.string());
  }
}

AnnotationStore::~AnnotationStore() = default;

std::int64_t AnnotationStore::now() const { return config_.now_ms(); }

void AnnotationStore::replay() {
  if (config_.log_path.empty() || !std::filesystem::exists(config_.log_path)) return;
  io::for_each_record(config_.log_path, [&](const io::Json& event, std::size_t line) {
    try {
      apply(event, true);
    } catch (const io::Json::exception& e) {
      throw ParseError(std::string("bad event: ") + e.what(), line);
    }
  });
}

void AnnotationStore::append(const io::Json& event) {
  if (!log_.is_open()) return;
  log_ << event.dump() << '\n';
  log_.flush();
  if (!log_) throw IoError("cannot append to event log " + config_.log_path.string());
}

void AnnotationStore::apply(const io::Json& event, bool from_log) {
  const std::string type = event.at("event").get<std::string>();
  const std::string rater_id = event.at("rater_id").get<std::string>();

  if (type == "qualification") {
    RaterRecord r;
    r.rater_id = rater_id;
    r.gold_correct = event.at("gold_correct").get<int>();
    r.gold_total = event.at("gold_total").get<int>();
    r.qualified = event.at("qualified").get<bool>();
    raters_.emplace(rater_id, r);
    return;
  }

  const std::string pair_id = event.at("pair_id").get<std::string>();
  const auto it = pairs_.find(pair_id);
  if (it == pairs_.end()) {
    if (from_log) throw ValidationError("event log references unknown pair '" + pair_id + "'");
    throw UnknownPair("unknown pair '" + pair_id + "'");
  }
  PairState& p = it->second;

  if (type == "serve") {
    const std::int64_t at = event.at("timestamp").get<std::int64_t>();
    p.leases[rater_id] = {event.at("presentation_seed").get<std::uint64_t>(), event.at("swapped").get<bool>(),
                          at + config_.lease_ms};
    ++p.servings;
    return;
  }

  if (type == "judgment") {
    Judgment j;
    j.pair_id = pair_id;
    j.rater_id = rater_id;
    j.answers = answers_from_json(event.at("answers"), 0);
    j.timestamp = event.at("timestamp").get<std::int64_t>();
    p.leases.erase(rater_id);
    p.judgments.push_back(j);
    judged_by_[rater_id].insert(pair_id);
    log_judgments_.push_back(std::move(j));
    p.pair.judgments = p.judgments.size();
    if (p.judgments.size() >= meta_eval::kMinJudges) {
      const auto verdicts = meta_eval::aggregate_judgments(p.judgments);
      p.pair.status = meta_eval::task_status(verdicts);
      for (const auto& [q, v] : verdicts) p.pair.human_label[q] = v.label;
    }
    return;
  }
  throw ValidationError("unknown event type '" + type + "'");
}

std::size_t AnnotationStore::active_leases(const PairState& p, const std::string& except_rater) const {
  const auto t = now();
  std::size_t n = 0;
  for (const auto& [rater, lease] : p.leases) {
    if (rater != except_rater && lease.expires_ms > t) ++n;
  }
  return n;
}

RaterRecord AnnotationStore::qualify_rater(const std::string& rater_id,
                                           const std::map<std::string, Answer>& answers) {
  std::unique_lock lock(mutex_);
  if (config_.gold.empty()) throw GoldSetMissing("no gold set is configured");
  if (const auto it = raters_.find(rater_id); it != raters_.end()) return it->second;

  int correct = 0;
  for (const auto& item : config_.gold) {
    const auto it = answers.find(item.item_id);
    if (it != answers.end() && it->second == item.answer) ++correct;
  }
  const int total = static_cast<int>(config_.gold.size());
  const bool qualified = correct * kQualifyDenominator >= total * kQualifyNumerator;

  io::Json event = io::Json::object();
  event["event"] = "qualification";
  event["rater_id"] = rater_id;
  event["gold_correct"] = correct;
  event["gold_total"] = total;
  event["qualified"] = qualified;
  event["timestamp"] = now();
  append(event);
  apply(event, false);
  return raters_.at(rater_id);
}

TaskPayload AnnotationStore::next_task(const std::string& rater_id) {
  std::unique_lock lock(mutex_);
  const auto r = raters_.find(rater_id);
  if (r == raters_.end() || !r->second.qualified) {
    throw NotQualified("rater '" + rater_id + "' has not qualified");
  }
  const auto& judged = judged_by_[rater_id];
  const auto t = now();

  auto payload_for = [&](const PairState& p, const Lease& lease) {
    const auto& first = lease.swapped ? p.pair.right : p.pair.left;
    const auto& second = lease.swapped ? p.pair.left : p.pair.right;
    auto url = [](const meta_eval::Side& s) { return "/images/" + (s.path.empty() ? s.image_id : s.path); };
    TaskPayload out;
    out.pair_id = p.pair.pair_id;
    const auto instr = config_.instructions.find(p.pair.instruction_id);
    if (instr != config_.instructions.end()) out.instruction = instr->second;
    out.left_image_url = url(first);
    out.right_image_url = url(second);
    out.presentation_seed = lease.presentation_seed;
    return out;
  };

  // A rater holding a live lease gets the same serving back.
  for (const auto& id : order_) {
    const PairState& p = pairs_.at(id);
    if (p.pair.status != TaskStatus::Open) continue;
    const auto lease = p.leases.find(rater_id);
    if (lease != p.leases.end() && lease->second.expires_ms > t) return payload_for(p, lease->second);
  }

  for (const auto& id : order_) {
    const PairState& p = pairs_.at(id);
    if (p.pair.status != TaskStatus::Open || judged.contains(id)) continue;
    if (p.judgments.size() + active_leases(p, rater_id) >= meta_eval::kMaxJudges) continue;

    const CounterRng rng(config_.seed, fnv1a(id), fnv1a(rater_id));
    // 53 bits so browser clients can hold the seed as a plain number.
    const std::uint64_t seed = rng.bits(p.servings) >> 11;
    io::Json event = io::Json::object();
    event["event"] = "serve";
    event["rater_id"] = rater_id;
    event["pair_id"] = id;
    event["presentation_seed"] = seed;
    event["swapped"] = (seed & 1u) != 0;
    event["timestamp"] = t;
    append(event);
    apply(event, false);
    return payload_for(p, p.leases.at(rater_id));
  }
  throw NoTasksRemaining("no open tasks left for rater '" + rater_id + "'");
}

TaskState AnnotationStore::submit_judgment(const std::string& rater_id, const std::string& pair_id,
                                           const std::map<Question, Answer>& answers) {
  std::unique_lock lock(mutex_);
  const auto it = pairs_.find(pair_id);
  if (it == pairs_.end()) throw UnknownPair("unknown pair '" + pair_id + "'");
  PairState& p = it->second;
  if (judged_by_[rater_id].contains(pair_id)) {
    throw DuplicateJudgment("rater '" + rater_id + "' already judged '" + pair_id + "'");
  }
  const auto lease = p.leases.find(rater_id);
  if (p.pair.status != TaskStatus::Open || lease == p.leases.end() || lease->second.expires_ms <= now()) {
    throw StaleTask("pair '" + pair_id + "' is not currently assigned to rater '" + rater_id + "'");
  }
  for (Question q : meta_eval::kQuestions) {
    if (!answers.contains(q)) {
      throw ValidationError("missing answer for " + std::string(meta_eval::question_id(q)));
    }
  }

  std::map<Question, Answer> canonical;
  for (const auto& [q, a] : answers) canonical[q] = lease->second.swapped ? flip(a) : a;
  const std::uint64_t seed = lease->second.presentation_seed;

  io::Json event = io::Json::object();
  event["event"] = "judgment";
  event["rater_id"] = rater_id;
  event["pair_id"] = pair_id;
  event["answers"] = answers_json(canonical);
  event["timestamp"] = now();
  append(event);
  apply(event, false);

  return {pair_id, p.judgments.size(), p.pair.status, seed};
}

PreferencePair AnnotationStore::export_pair(const PairState& p) const {
  PreferencePair out = p.pair;
  for (Question q : meta_eval::kQuestions) {
    if (!out.human_label.contains(q) || p.judgments.size() < meta_eval::kMinJudges) {
      out.human_label[q] = meta_eval::Label::Pending;
    }
  }
  return out;
}

std::vector<PreferencePair> AnnotationStore::export_annotations() const {
  std::shared_lock lock(mutex_);
  std::vector<PreferencePair> out;
  out.reserve(order_.size());
  for (const auto& id : order_) out.push_back(export_pair(pairs_.at(id)));
  return out;
}

std::optional<RaterRecord> AnnotationStore::rater(const std::string& rater_id) const {
  std::shared_lock lock(mutex_);
  const auto it = raters_.find(rater_id);
  if (it == raters_.end()) return std::nullopt;
  return it->second;
}

TaskState AnnotationStore::task_state(const std::string& pair_id) const {
  std::shared_lock lock(mutex_);
  const auto it = pairs_.find(pair_id);
  if (it == pairs_.end()) throw UnknownPair("unknown pair '" + pair_id + "'");
  return {pair_id, it->second.judgments.size(), it->second.pair.status, 0};
}

std::vector<Judgment> AnnotationStore::judgments() const {
  std::shared_lock lock(mutex_);
  return log_judgments_;
}

}  // namespace typescore::annotation
