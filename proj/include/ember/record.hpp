#pragma once

// JSON Lines mapping for raw feature documents and metadata records.
// Key names and order follow the EMBER2024 record layout; absent PE
// groups are written as empty objects/arrays, never omitted.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ember/features.hpp"

namespace ember {

class PatternSet;

class RecordError : public std::runtime_error {
 public:
  enum class Kind { syntax, missing_key, wrong_type, invariant };

  RecordError(Kind kind, std::string field, const std::string& message)
      : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

  Kind kind() const { return kind_; }
  // Dotted path of the offending key ("strings.printabledist"); empty for syntax errors.
  const std::string& field() const { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

struct Violation {
  std::string field;
  std::string message;

  bool operator==(const Violation&) const = default;
};

nlohmann::ordered_json raw_to_json(const RawFeatures& raw);
RawFeatures raw_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json record_to_json(const FileMetadataRecord& record);
FileMetadataRecord record_from_json(const nlohmann::ordered_json& j);

// One line, no trailing newline.
std::string serialize_record(const FileMetadataRecord& record);
// Throws RecordError; invariant failures name the first violated field.
FileMetadataRecord parse_record(std::string_view line);

// Raw documents on their own (the extractor's output). `id` keys such as
// "sha256" may precede the feature groups; they are returned in `extras`.
std::string serialize_raw(const RawFeatures& raw, const nlohmann::ordered_json& extras = nlohmann::ordered_json::object());
RawFeatures parse_raw(std::string_view line, nlohmann::ordered_json* extras = nullptr);

std::vector<Violation> validate_raw(const RawFeatures& raw, const PatternSet* patterns = nullptr);
std::vector<Violation> validate_record(const FileMetadataRecord& record, const PatternSet* patterns = nullptr);

bool is_valid_tlsh_text(std::string_view s);

}  // namespace ember
