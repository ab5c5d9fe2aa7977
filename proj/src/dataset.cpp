#include "randnn/dataset.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace randnn::dataset {

namespace {

using nlohmann::json;

std::vector<std::string> split_row(const std::string& line, char delim) {
    std::vector<std::string> tokens;
    std::string token;
    std::istringstream is(line);
    if (delim == ' ') {
        while (is >> token) tokens.push_back(token);
    } else {
        while (std::getline(is, token, delim)) {
            // trim surrounding whitespace
            const auto first = token.find_first_not_of(" \t\r");
            const auto last = token.find_last_not_of(" \t\r");
            tokens.push_back(first == std::string::npos ? "" : token.substr(first, last - first + 1));
        }
    }
    return tokens;
}

double parse_cell(const std::string& token, const std::string& origin, std::size_t line_no) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &consumed);
    } catch (const std::exception&) {
        consumed = 0;
    }
    if (consumed != token.size() || token.empty() || !std::isfinite(value)) {
        throw std::runtime_error(origin + ": line " + std::to_string(line_no) +
                                 ": non-numeric cell '" + token + "'");
    }
    return value;
}

[[noreturn]] void record_error(const std::string& origin, std::size_t line_no, const std::string& msg) {
    throw std::runtime_error(origin + ": line " + std::to_string(line_no) + ": " + msg);
}

Matrix features_from_json(const json& j, const std::string& origin, std::size_t line_no) {
    if (!j.is_array() || j.empty()) record_error(origin, line_no, "'features' must be a nonempty array");
    const std::size_t n = j.size();
    std::size_t dim = 0;
    if (j[0].is_array()) dim = j[0].size();
    if (dim == 0) record_error(origin, line_no, "feature rows must be nonempty arrays");
    Matrix out(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != dim) {
            record_error(origin, line_no, "feature row " + std::to_string(i) + " has inconsistent length");
        }
        for (std::size_t d = 0; d < dim; ++d) {
            if (!j[i][d].is_number()) record_error(origin, line_no, "non-numeric feature value");
            out(i, d) = j[i][d].get<double>();
        }
    }
    return out;
}

StructureRecord parse_record(const json& j, const std::string& origin, std::size_t line_no) {
    if (!j.is_object()) record_error(origin, line_no, "expected a JSON object");
    const std::string kind = j.value("kind", "");
    StructureRecord rec;

    if (kind == "tree") {
        structures::TreeData tree;
        tree.labels = features_from_json(j.at("features"), origin, line_no);
        if (!j.contains("children") || !j["children"].is_array() ||
            j["children"].size() != static_cast<std::size_t>(tree.num_nodes())) {
            record_error(origin, line_no, "'children' must list one array per node");
        }
        tree.children.resize(tree.num_nodes());
        for (int n = 0; n < tree.num_nodes(); ++n) {
            for (const auto& c : j["children"][n]) {
                if (!c.is_number_integer()) record_error(origin, line_no, "child ids must be integers");
                tree.children[n].push_back(c.get<int>());
            }
        }
        tree.root = j.value("root", 0);
        try {
            structures::validate_tree(tree);
        } catch (const std::exception& e) {
            record_error(origin, line_no, e.what());
        }
        rec.data = std::move(tree);
    } else if (kind == "graph") {
        structures::GraphData graph;
        graph.features = features_from_json(j.at("features"), origin, line_no);
        graph.directed = j.value("directed", false);
        if (j.contains("edges")) {
            for (const auto& e : j["edges"]) {
                if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
                    record_error(origin, line_no, "edges must be [from, to] integer pairs");
                }
                graph.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
            }
        }
        try {
            structures::validate_graph(graph);
        } catch (const std::exception& e) {
            record_error(origin, line_no, e.what());
        }
        rec.data = std::move(graph);
    } else {
        record_error(origin, line_no, "record 'kind' must be \"tree\" or \"graph\"");
    }

    if (j.contains("label")) {
        const auto& lab = j["label"];
        if (lab.is_number()) {
            Vector v(1);
            v(0) = lab.get<double>();
            rec.label = v;
        } else if (lab.is_array()) {
            Vector v(lab.size());
            for (std::size_t i = 0; i < lab.size(); ++i) {
                if (!lab[i].is_number()) record_error(origin, line_no, "label entries must be numbers");
                v(i) = lab[i].get<double>();
            }
            rec.label = v;
        } else {
            record_error(origin, line_no, "label must be a number or an array of numbers");
        }
    }
    return rec;
}

}  // namespace

TimeSeriesData parse_timeseries(std::istream& in, const std::string& origin) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw std::runtime_error(origin + ": empty file");
    ++line_no;
    const char delim = line.find(',') != std::string::npos ? ',' : ' ';
    const auto header = split_row(line, delim);
    if (header.empty()) throw std::runtime_error(origin + ": empty header row");

    TimeSeriesData data;
    std::vector<int> slot;  // column -> input index (>=0) or target index (<0, offset by 1)
    for (const auto& name : header) {
        if (!name.empty() && name[0] == 'x') {
            slot.push_back(static_cast<int>(data.input_names.size()));
            data.input_names.push_back(name);
        } else if (!name.empty() && name[0] == 'y') {
            slot.push_back(-static_cast<int>(data.target_names.size()) - 1);
            data.target_names.push_back(name);
        } else {
            throw std::runtime_error(origin + ": header column '" + name +
                                     "' must start with 'x' (input) or 'y' (target)");
        }
    }
    if (data.input_names.empty()) throw std::runtime_error(origin + ": no input columns in header");

    std::vector<std::vector<double>> in_rows, tgt_rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_row(line, delim);
        if (cells.size() != header.size()) {
            record_error(origin, line_no,
                         "ragged row: expected " + std::to_string(header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        }
        std::vector<double> in_row(data.input_names.size());
        std::vector<double> tgt_row(data.target_names.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double v = parse_cell(cells[c], origin, line_no);
            if (slot[c] >= 0) {
                in_row[static_cast<std::size_t>(slot[c])] = v;
            } else {
                tgt_row[static_cast<std::size_t>(-slot[c] - 1)] = v;
            }
        }
        in_rows.push_back(std::move(in_row));
        tgt_rows.push_back(std::move(tgt_row));
    }
    if (in_rows.empty()) throw std::runtime_error(origin + ": no data rows");

    data.inputs.resize(in_rows.size(), data.input_names.size());
    data.targets.resize(tgt_rows.size(), data.target_names.size());
    for (std::size_t r = 0; r < in_rows.size(); ++r) {
        for (std::size_t c = 0; c < data.input_names.size(); ++c) data.inputs(r, c) = in_rows[r][c];
        for (std::size_t c = 0; c < data.target_names.size(); ++c) data.targets(r, c) = tgt_rows[r][c];
    }
    return data;
}

TimeSeriesData load_timeseries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
    return parse_timeseries(in, path);
}

std::vector<StructureRecord> parse_structures(std::istream& in, const std::string& origin) {
    std::vector<StructureRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            record_error(origin, line_no, std::string("bad JSON record: ") + e.what());
        }
        records.push_back(parse_record(j, origin, line_no));
    }
    if (records.empty()) throw std::runtime_error(origin + ": no structure records");
    return records;
}

std::vector<StructureRecord> load_structures(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open structure file '" + path + "'");
    return parse_structures(in, path);
}

}  // namespace randnn::dataset
