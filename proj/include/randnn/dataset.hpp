#pragma once

#include "randnn/structures.hpp"
#include "randnn/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace randnn::dataset {

/// Delimited time-series/tabular data. Header names starting with 'x' are
/// inputs, 'y' are targets; targets may be absent.
struct TimeSeriesData {
    Matrix inputs;   // T x D
    Matrix targets;  // T x O (0 columns when absent)
    std::vector<std::string> input_names;
    std::vector<std::string> target_names;

    bool has_targets() const { return targets.cols() > 0; }
};

TimeSeriesData load_timeseries(const std::string& path);
TimeSeriesData parse_timeseries(std::istream& in, const std::string& origin);

/// One structure per JSONL record, with an optional per-structure label.
struct StructureRecord {
    std::variant<structures::TreeData, structures::GraphData> data;
    std::optional<Vector> label;

    bool is_tree() const { return std::holds_alternative<structures::TreeData>(data); }
};

std::vector<StructureRecord> load_structures(const std::string& path);
std::vector<StructureRecord> parse_structures(std::istream& in, const std::string& origin);

}  // namespace randnn::dataset
