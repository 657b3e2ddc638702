#pragma once

#include "wtn/solvers.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>

namespace wtn::io {

using Json = nlohmann::json;

/// {"n": n, "m": m, "mass": [row-major]}
Json to_json(const JointDistribution& dist);
JointDistribution distribution_from_json(const Json& doc);

/// {"kind": ..., "alpha": ..., "row": [...], "col": [...]}
Json to_json(const MarginalWeights& w);
MarginalWeights weights_from_json(const Json& doc);

/// Dense: {"type": "dense", "n", "m", "X": [row-major]}.
/// Factored: {"type": "factored", "n", "m", "k", "U": [[...] per row], "V": [[...] per row]}.
Json to_json(const CompletionModel& model);
CompletionModel model_from_json(const Json& doc);

/// CSV with header `t,i,j,value`.
void write_sample_csv(std::ostream& out, const SampleSet& sample);
/// Grid size is not stored in the CSV; pass it, or 0 to infer max index + 1.
SampleSet read_sample_csv(std::istream& in, Index n = 0, Index m = 0);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);

}  // namespace wtn::io
