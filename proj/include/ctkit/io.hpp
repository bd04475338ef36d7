#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctkit/learners.hpp"
#include "ctkit/matrix.hpp"
#include "ctkit/records.hpp"

namespace ctkit {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view s, const std::string& context);

// Writes to "<path>.tmp" and renames into place, so failures never leave a
// partial file behind.
void atomic_write(const std::filesystem::path& path, const std::string& content);

// One JSON object per line, UTF-8. Unknown fields are ignored on read;
// missing optional fields default. Errors name the offending line.
std::vector<ProfileRecord> read_profiles(const std::filesystem::path& path);
void write_profiles(const std::vector<ProfileRecord>& profiles,
                    const std::filesystem::path& path);

std::vector<CommentRecord> read_comments(const std::filesystem::path& path);
void write_comments(const std::vector<CommentRecord>& comments,
                    const std::filesystem::path& path);

// CSV with header "user_id,label,<feature names...>"; the label column holds
// -1 when the matrix is unlabeled. Columns are canonicalized on write.
void write_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path);
FeatureMatrix read_matrix(const std::filesystem::path& path);

// Model JSON round-trips learned parameters bit-exactly.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

nlohmann::ordered_json spec_to_json(const ClassifierSpec& spec);
ClassifierSpec spec_from_json(const nlohmann::json& j);

}  // namespace ctkit
