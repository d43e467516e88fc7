#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recourse/error.hpp"
#include "recourse/io.hpp"

// Reader and encoder for the UCI Statlog German Credit file ("german.data"):
// 1000 lines, 20 attributes + class label, whitespace separated. Categorical
// attributes use codes such as A43; the label is 1 (good) or 2 (bad).

namespace recourse::german {

inline constexpr std::size_t kAttributeCount = 20;

struct AttributeSpec {
  std::string_view name;
  bool categorical;
  std::vector<std::string_view> codes;  // categorical only, in code order
  long long min_value = 0;              // integer only, inclusive
  long long max_value = 0;
};

inline const std::array<AttributeSpec, kAttributeCount>& attributes() {
  static const std::array<AttributeSpec, kAttributeCount> table{{
      {"checking_status", true, {"A11", "A12", "A13", "A14"}},
      {"duration_months", false, {}, 1, 1000},
      {"credit_history", true, {"A30", "A31", "A32", "A33", "A34"}},
      {"purpose", true, {"A40", "A41", "A42", "A43", "A44", "A45", "A46", "A47", "A48", "A49", "A410"}},
      {"credit_amount", false, {}, 1, 100000000},
      {"savings", true, {"A61", "A62", "A63", "A64", "A65"}},
      {"employment_since", true, {"A71", "A72", "A73", "A74", "A75"}},
      {"installment_rate", false, {}, 1, 4},
      {"personal_status_sex", true, {"A91", "A92", "A93", "A94", "A95"}},
      {"other_debtors", true, {"A101", "A102", "A103"}},
      {"residence_since", false, {}, 1, 4},
      {"property", true, {"A121", "A122", "A123", "A124"}},
      {"age_years", false, {}, 1, 150},
      {"other_installment_plans", true, {"A141", "A142", "A143"}},
      {"housing", true, {"A151", "A152", "A153"}},
      {"existing_credits", false, {}, 1, 4},
      {"job", true, {"A171", "A172", "A173", "A174"}},
      {"people_liable", false, {}, 1, 2},
      {"telephone", true, {"A191", "A192"}},
      {"foreign_worker", true, {"A201", "A202"}},
  }};
  return table;
}

// Attribute positions (0-based) used by name elsewhere.
namespace attr {
inline constexpr std::size_t kDuration = 1;
inline constexpr std::size_t kPurpose = 3;
inline constexpr std::size_t kAmount = 4;
inline constexpr std::size_t kPersonalStatus = 8;
inline constexpr std::size_t kResidence = 10;
inline constexpr std::size_t kAge = 12;
inline constexpr std::size_t kTelephone = 18;
inline constexpr std::size_t kForeignWorker = 19;
}  // namespace attr

/// One parsed line. Categorical attributes hold the index of their code in
/// the attribute's code list; integer attributes hold the value.
struct RawRecord {
  std::array<long long, kAttributeCount> values{};
  int label = 1;  // 1 = good (profitable), 2 = bad (unprofitable)

  std::string_view code(std::size_t attribute) const {
    return attributes()[attribute].codes[static_cast<std::size_t>(values[attribute])];
  }
  bool profitable() const noexcept { return label == 1; }
};

inline RawRecord parse_line(std::string_view line, std::size_t line_no) {
  const auto fields = io::split_whitespace(line);
  const auto where = "line " + std::to_string(line_no) + ": ";
  if (fields.size() != kAttributeCount + 1) {
    throw ValidationError(where + "expected " + std::to_string(kAttributeCount + 1) + " fields, got " +
                          std::to_string(fields.size()));
  }
  RawRecord rec;
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    const AttributeSpec& spec = attributes()[i];
    const std::string_view f = fields[i];
    if (spec.categorical) {
      const auto it = std::find(spec.codes.begin(), spec.codes.end(), f);
      if (it == spec.codes.end()) {
        throw ValidationError(where + "unknown code '" + std::string(f) + "' for attribute " +
                              std::string(spec.name));
      }
      rec.values[i] = it - spec.codes.begin();
    } else {
      long long v = 0;
      if (!io::try_parse_int(f, v)) {
        throw ValidationError(where + "malformed integer '" + std::string(f) + "' for attribute " +
                              std::string(spec.name));
      }
      if (v < spec.min_value || v > spec.max_value) {
        throw ValidationError(where + "value " + std::to_string(v) + " out of range for attribute " +
                              std::string(spec.name));
      }
      rec.values[i] = v;
    }
  }
  long long label = 0;
  if (!io::try_parse_int(fields[kAttributeCount], label) || (label != 1 && label != 2)) {
    throw ValidationError(where + "label must be 1 or 2, got '" + std::string(fields[kAttributeCount]) + "'");
  }
  rec.label = static_cast<int>(label);
  return rec;
}

/// Blank lines are skipped; anything else must be a complete record.
inline std::vector<RawRecord> parse_german(std::string_view text) {
  std::vector<RawRecord> out;
  std::size_t line_no = 0;
  for (std::string_view line : io::split(text, '\n')) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    out.push_back(parse_line(line, line_no));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Encoding
//
// Integer attributes are z-scored with mean and sample SD taken from the
// fitting records. Each categorical attribute is one-hot encoded with its
// first code dropped as the reference level. Column order: all integer
// attributes in file order, then the categorical dummies in file order.

struct StandardizedColumn {
  std::size_t attribute;
  double mean;
  double sd;
};

struct DummyColumn {
  std::size_t attribute;
  long long code_index;
};

struct EncodingSpec {
  std::vector<StandardizedColumn> continuous;
  std::vector<DummyColumn> dummies;

  std::size_t width() const noexcept { return continuous.size() + dummies.size(); }

  std::vector<std::string> column_names() const {
    std::vector<std::string> names;
    for (const auto& c : continuous) names.emplace_back(attributes()[c.attribute].name);
    for (const auto& d : dummies) {
      const auto& spec = attributes()[d.attribute];
      names.push_back(std::string(spec.name) + "=" +
                      std::string(spec.codes[static_cast<std::size_t>(d.code_index)]));
    }
    return names;
  }

  /// FNV-1a over the column names and standardization constants.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::string_view s) {
      for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
      }
      h ^= 0xff;
      h *= 0x100000001b3ULL;
    };
    for (const auto& name : column_names()) feed(name);
    for (const auto& c : continuous) {
      feed(io::format_exact(c.mean));
      feed(io::format_exact(c.sd));
    }
    return h;
  }
};

inline double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline EncodingSpec fit_encoding(std::span<const RawRecord> records) {
  if (records.empty()) throw ValidationError("cannot fit an encoding on zero records");
  EncodingSpec spec;
  std::vector<double> column(records.size());
  for (std::size_t a = 0; a < kAttributeCount; ++a) {
    if (attributes()[a].categorical) continue;
    for (std::size_t i = 0; i < records.size(); ++i) column[i] = static_cast<double>(records[i].values[a]);
    const double sd = sample_sd(column);
    spec.continuous.push_back({a, mean_of(column), sd > 0.0 ? sd : 1.0});
  }
  for (std::size_t a = 0; a < kAttributeCount; ++a) {
    const auto& attr = attributes()[a];
    if (!attr.categorical) continue;
    for (std::size_t k = 1; k < attr.codes.size(); ++k) spec.dummies.push_back({a, static_cast<long long>(k)});
  }
  return spec;
}

struct EncodedRecord {
  std::vector<double> features;
  int label = 1;  // +1 profitable, -1 unprofitable
  std::uint64_t fingerprint = 0;
};

inline EncodedRecord encode_one(const RawRecord& rec, const EncodingSpec& spec, std::uint64_t fingerprint) {
  EncodedRecord out;
  out.features.reserve(spec.width());
  for (const auto& c : spec.continuous) {
    out.features.push_back((static_cast<double>(rec.values[c.attribute]) - c.mean) / c.sd);
  }
  for (const auto& d : spec.dummies) out.features.push_back(rec.values[d.attribute] == d.code_index ? 1.0 : 0.0);
  out.label = rec.label == 1 ? 1 : -1;
  out.fingerprint = fingerprint;
  return out;
}

inline std::vector<EncodedRecord> encode(std::span<const RawRecord> raw, const EncodingSpec& spec) {
  const std::uint64_t fp = spec.fingerprint();
  std::vector<EncodedRecord> out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back(encode_one(r, spec, fp));
  return out;
}

// ---------------------------------------------------------------------------
// Summary statistics, grouped by label, on unencoded values.

struct ContinuousSummary {
  std::string name;
  double mean;
  double sd;
};

struct FlagSummary {
  std::string name;
  double mean;
};

struct GroupSummary {
  std::size_t count = 0;
  std::vector<ContinuousSummary> continuous;
  std::vector<FlagSummary> flags;
};

struct SummaryStats {
  GroupSummary unprofitable;
  GroupSummary profitable;

  std::size_t total() const noexcept { return unprofitable.count + profitable.count; }
};

struct ContinuousFeature {
  std::string_view name;
  std::size_t attribute;
};

inline constexpr std::array<ContinuousFeature, 4> kSummaryContinuous{{
    {"age", attr::kAge},
    {"years_at_current_home", attr::kResidence},
    {"loan_duration", attr::kDuration},
    {"loan_amount", attr::kAmount},
}};

struct FlagFeature {
  std::string_view name;
  std::size_t attribute;
  std::array<std::string_view, 2> codes;  // flag is 1 when the code matches either entry
};

// female: A92 (female, divorced/separated/married) and A95 (female, single).
// foreign_worker: A201 ("yes") as coded in the raw file.
inline constexpr std::array<FlagFeature, 5> kSummaryFlags{{
    {"female", attr::kPersonalStatus, {"A92", "A95"}},
    {"foreign_worker", attr::kForeignWorker, {"A201", "A201"}},
    {"purpose_new_car", attr::kPurpose, {"A40", "A40"}},
    {"purpose_electronics", attr::kPurpose, {"A43", "A43"}},
    {"has_telephone", attr::kTelephone, {"A192", "A192"}},
}};

inline bool flag_value(const RawRecord& r, const FlagFeature& f) {
  const std::string_view code = r.code(f.attribute);
  return code == f.codes[0] || code == f.codes[1];
}

inline GroupSummary summarize_group(std::span<const RawRecord> all, bool profitable) {
  GroupSummary g;
  std::vector<const RawRecord*> members;
  for (const auto& r : all) {
    if (r.profitable() == profitable) members.push_back(&r);
  }
  g.count = members.size();
  std::vector<double> xs(members.size());
  for (const auto& feat : kSummaryContinuous) {
    for (std::size_t i = 0; i < members.size(); ++i) xs[i] = static_cast<double>(members[i]->values[feat.attribute]);
    g.continuous.push_back({std::string(feat.name), mean_of(xs), sample_sd(xs)});
  }
  for (const auto& feat : kSummaryFlags) {
    for (std::size_t i = 0; i < members.size(); ++i) xs[i] = flag_value(*members[i], feat) ? 1.0 : 0.0;
    g.flags.push_back({std::string(feat.name), mean_of(xs)});
  }
  return g;
}

/// Group-wise means and sample SDs. A group with no members reports NaN means.
inline SummaryStats summarize(std::span<const RawRecord> records) {
  if (records.empty()) throw ValidationError("summarize: no records");
  return {summarize_group(records, false), summarize_group(records, true)};
}

}  // namespace recourse::german
