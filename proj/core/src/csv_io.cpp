#include "causalift/dataset.hpp"

#include "causalift/error.hpp"
#include "text.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace causalift {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".meta.json");
    return p;
}

TimeSeriesDataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path.string() + ": empty file");
    }
    std::vector<Variable> variables;
    for (auto name : split(line)) {
        variables.push_back({std::string(name), ""});
    }

    std::vector<double> cells;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != variables.size()) {
            throw DataError(path.string() + ": ragged row " + std::to_string(rows) + " (line " +
                            std::to_string(line_no) + ") has " + std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(variables.size()));
        }
        for (std::size_t j = 0; j < fields.size(); ++j) {
            const auto field = fields[j];
            if (field.empty()) {
                throw DataError(path.string() + ": missing value at row " + std::to_string(rows) + " (line " +
                                std::to_string(line_no) + "), column '" + variables[j].name + "'");
            }
            double v = 0.0;
            const char* first = field.data();
            if (*first == '+') {
                ++first;
            }
            auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
            if (ec != std::errc() || ptr != field.data() + field.size()) {
                throw DataError(path.string() + ": non-numeric value '" + std::string(field) + "' at row " +
                                std::to_string(rows) + " (line " + std::to_string(line_no) + "), column '" +
                                variables[j].name + "'");
            }
            cells.push_back(v);
        }
        ++rows;
    }
    if (rows < 2) {
        throw DataError(path.string() + ": need at least 2 data rows");
    }

    Matrix values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(variables.size()));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < variables.size(); ++j) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i * variables.size() + j];
        }
    }

    std::string step = "1h";
    std::vector<InterventionEvent> events;
    std::optional<std::uint64_t> seed;
    const auto meta_path = sidecar_path(path);
    if (std::filesystem::exists(meta_path)) {
        std::ifstream meta_in(meta_path);
        nlohmann::json meta;
        try {
            meta = nlohmann::json::parse(meta_in);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(meta_path.string() + ": " + e.what());
        }
        try {
            if (meta.contains("step")) {
                step = meta.at("step").get<std::string>();
            }
            if (meta.contains("seed") && !meta.at("seed").is_null()) {
                seed = meta.at("seed").get<std::uint64_t>();
            }
            if (meta.contains("units")) {
                for (auto& v : variables) {
                    if (meta.at("units").contains(v.name)) {
                        v.unit = meta.at("units").at(v.name).get<std::string>();
                    }
                }
            }
            if (meta.contains("interventions")) {
                for (const auto& e : meta.at("interventions")) {
                    events.push_back({e.at("time_index").get<std::size_t>(), e.at("variable").get<std::string>(),
                                      e.at("new_value").get<double>()});
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError(meta_path.string() + ": " + e.what());
        }
    }
    return TimeSeriesDataset(std::move(variables), std::move(values), std::move(step), std::move(events), seed);
}

void write_csv(const TimeSeriesDataset& ds, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    const auto& vars = ds.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        out << (j ? "," : "") << vars[j].name;
    }
    out << '\n';
    const auto& values = ds.values();
    std::string row;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        row.clear();
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j) {
                row += ',';
            }
            row += detail::format_double(values(i, j));
        }
        out << row << '\n';
    }

    nlohmann::ordered_json meta;
    meta["step"] = ds.step();
    nlohmann::ordered_json units = nlohmann::ordered_json::object();
    for (const auto& v : vars) {
        units[v.name] = v.unit;
    }
    meta["units"] = units;
    meta["seed"] = ds.seed() ? nlohmann::ordered_json(*ds.seed()) : nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json events = nlohmann::ordered_json::array();
    for (const auto& e : ds.interventions()) {
        events.push_back({{"time_index", e.time_index}, {"variable", e.variable}, {"new_value", e.new_value}});
    }
    meta["interventions"] = events;
    std::ofstream meta_out(sidecar_path(path));
    meta_out << meta.dump(2) << '\n';
}

}  // namespace causalift
