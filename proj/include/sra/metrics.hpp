#pragma once

#include <json.hpp>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sra {

struct MetricsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mean Relative Accuracy: fraction of thresholds theta in {0.50..0.95 step
/// 0.05} with |predicted - truth| / |truth| < 1 - theta. Errors on zero truth.
double mra(double predicted, double truth);

/// Exact-match indicator after normalization (case-insensitive, stripped).
int acc(const std::string& predicted, const std::string& truth);

std::string normalize_answer(const std::string& s);

struct KindScore {
    int count = 0;
    double score_sum = 0.0;  // per-question ACC or MRA contributions
    std::vector<std::string> failure_ids;

    double mean() const { return count ? score_sum / count : 0.0; }
};

struct EvalReport {
    std::map<std::string, KindScore> per_kind;
    int total = 0;

    /// Unweighted mean over represented kinds.
    double overall() const;

    nlohmann::ordered_json to_json() const;
    std::string table() const;  // human-readable summary
};

struct PredictionRecord {
    std::string question_id;
    std::string final_answer;
    std::string trace_path;
};

void save_predictions(const std::vector<PredictionRecord>& predictions,
                      const std::string& path);
std::vector<PredictionRecord> load_predictions(const std::string& path);

/// Scores a prediction against one question record: MCA -> acc on letters,
/// numerical -> mra (a failure entry is a score below 1.0 for acc or an
/// unparseable prediction).
struct QuestionKeyView {
    std::string question_id;
    std::string kind;
    std::string answer_type;  // "numerical" | "multiple_choice"
    std::string ground_truth;
};

EvalReport evaluate(const std::vector<QuestionKeyView>& questions,
                    const std::vector<PredictionRecord>& predictions);

}  // namespace sra
