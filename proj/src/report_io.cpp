#include "sigmar/report_io.hpp"

#include <charconv>
#include <map>
#include <ostream>

#include "json.hpp"

namespace sigmar {

std::string csv_number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

namespace {

// "<report name>" for the first occurrence, "<report name>#2" for the next.
std::vector<std::string> unique_report_keys(const std::vector<VerificationReport>& reports) {
    std::vector<std::string> keys;
    std::map<std::string, std::size_t> seen;
    keys.reserve(reports.size());
    for (const VerificationReport& rep : reports) {
        const std::size_t k = ++seen[rep.name];
        keys.push_back(k == 1 ? rep.name : rep.name + "#" + std::to_string(k));
    }
    return keys;
}

nlohmann::ordered_json row_to_json(const CheckRow& row) {
    nlohmann::ordered_json j;
    j["check"] = row.check;
    j["statistic"] = row.statistic;
    j["value"] = row.value;
    j["tolerance"] = row.tolerance;
    j["asserted"] = row.asserted;
    j["pass"] = row.pass;
    j["note"] = row.note;
    return j;
}

}  // namespace

void write_report_csv(std::ostream& out, const std::string& experiment,
                      const std::vector<VerificationReport>& reports) {
    out << "experiment,check,statistic,value,tolerance,pass,n_paths,n_steps,seed\n";
    const std::vector<std::string> keys = unique_report_keys(reports);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const VerificationReport& rep = reports[i];
        for (const CheckRow& row : rep.rows) {
            out << experiment << ',' << keys[i] << '.' << row.check << ',' << row.statistic
                << ',' << csv_number(row.value) << ',' << csv_number(row.tolerance) << ','
                << (row.pass ? "true" : "false") << ',' << rep.n_paths << ',' << rep.n_steps
                << ',' << rep.seed << '\n';
        }
    }
}

void write_report_json(std::ostream& out, const std::string& experiment,
                       const std::vector<VerificationReport>& reports) {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["reports"] = nlohmann::ordered_json::array();
    for (const VerificationReport& rep : reports) {
        nlohmann::ordered_json r;
        r["name"] = rep.name;
        r["n_paths"] = rep.n_paths;
        r["n_steps"] = rep.n_steps;
        r["horizon"] = rep.horizon;
        r["seed"] = rep.seed;
        r["parameters"] = rep.parameters;
        r["rows"] = nlohmann::ordered_json::array();
        for (const CheckRow& row : rep.rows) r["rows"].push_back(row_to_json(row));
        j["reports"].push_back(std::move(r));
    }
    out << j.dump(2) << '\n';
}

void write_paths_jsonl(std::ostream& out, const std::string& experiment,
                       const std::vector<SamplePath>& paths) {
    for (std::size_t i = 0; i < paths.size(); ++i) {
        nlohmann::ordered_json j;
        j["experiment"] = experiment;
        j["path_index"] = i;
        j["role"] = paths[i].role;
        j["n_steps"] = paths[i].grid.n_steps;
        j["horizon"] = paths[i].grid.horizon;
        j["values"] = paths[i].values;
        out << j.dump() << '\n';
    }
}

bool all_asserted_pass(const std::vector<VerificationReport>& reports) {
    for (const VerificationReport& rep : reports)
        for (const CheckRow& row : rep.rows)
            if (row.asserted && !row.pass) return false;
    return true;
}

}  // namespace sigmar
