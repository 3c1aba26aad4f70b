#include "sra/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sra {

using nlohmann::json;
using nlohmann::ordered_json;

double mra(double predicted, double truth) {
    if (truth == 0.0) throw MetricsError("mra is undefined for zero ground truth");
    double relative_error = std::abs(predicted - truth) / std::abs(truth);
    int passed = 0;
    for (int i = 0; i < 10; ++i) {
        double theta = 0.50 + 0.05 * i;
        if (relative_error < 1.0 - theta) ++passed;
    }
    return passed / 10.0;
}

std::string normalize_answer(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    std::string out = s.substr(begin, end - begin);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return out;
}

int acc(const std::string& predicted, const std::string& truth) {
    return normalize_answer(predicted) == normalize_answer(truth) ? 1 : 0;
}

double EvalReport::overall() const {
    if (per_kind.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [kind, score] : per_kind) sum += score.mean();
    return sum / static_cast<double>(per_kind.size());
}

ordered_json EvalReport::to_json() const {
    ordered_json j;
    j["total"] = total;
    j["overall"] = overall();
    j["per_kind"] = ordered_json::object();
    for (const auto& [kind, score] : per_kind) {
        j["per_kind"][kind] = {{"count", score.count},
                               {"score", score.mean()},
                               {"failure_ids", score.failure_ids}};
    }
    return j;
}

std::string EvalReport::table() const {
    std::ostringstream out;
    out << std::left << std::setw(30) << "kind" << std::right << std::setw(8) << "count"
        << std::setw(10) << "score" << "\n";
    for (const auto& [kind, score] : per_kind) {
        out << std::left << std::setw(30) << kind << std::right << std::setw(8)
            << score.count << std::setw(10) << std::fixed << std::setprecision(4)
            << score.mean() << "\n";
    }
    out << std::left << std::setw(30) << "overall" << std::right << std::setw(8) << total
        << std::setw(10) << std::fixed << std::setprecision(4) << overall() << "\n";
    return out.str();
}

void save_predictions(const std::vector<PredictionRecord>& predictions,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MetricsError("cannot write prediction file: " + path);
    for (const auto& p : predictions) {
        ordered_json j;
        j["question_id"] = p.question_id;
        j["final_answer"] = p.final_answer;
        j["trace_path"] = p.trace_path;
        out << j.dump() << "\n";
    }
}

std::vector<PredictionRecord> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MetricsError("cannot open prediction file: " + path);
    std::vector<PredictionRecord> predictions;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            predictions.push_back({j.at("question_id").get<std::string>(),
                                   j.at("final_answer").get<std::string>(),
                                   j.value("trace_path", "")});
        } catch (const json::exception& e) {
            throw MetricsError(path + ":" + std::to_string(line_no) +
                               ": parse error: " + e.what());
        }
    }
    return predictions;
}

EvalReport evaluate(const std::vector<QuestionKeyView>& questions,
                    const std::vector<PredictionRecord>& predictions) {
    std::map<std::string, const PredictionRecord*> by_id;
    for (const auto& p : predictions) by_id[p.question_id] = &p;

    EvalReport report;
    for (const auto& q : questions) {
        auto it = by_id.find(q.question_id);
        KindScore& ks = report.per_kind[q.kind];
        ++ks.count;
        ++report.total;
        double score = 0.0;
        if (it != by_id.end()) {
            if (q.answer_type == "numerical") {
                try {
                    score = mra(std::stod(it->second->final_answer), std::stod(q.ground_truth));
                } catch (const std::exception&) {
                    score = 0.0;  // unparseable prediction (e.g. sentinel)
                }
            } else {
                score = acc(it->second->final_answer, q.ground_truth);
            }
        }
        ks.score_sum += score;
        if (score < 1.0) ks.failure_ids.push_back(q.question_id);
    }
    return report;
}

}  // namespace sra
