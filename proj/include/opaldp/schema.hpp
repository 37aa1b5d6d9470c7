// Copyright 2026 The opaldp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPALDP_SCHEMA_HPP_
#define OPALDP_SCHEMA_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "opaldp/error.hpp"

namespace opaldp {

// One point of a histogram domain: attribute values in schema order.
using Point = std::vector<std::string>;

inline constexpr int kMinutesPerDay = 1440;

inline const std::vector<std::string>& TransportModes() {
  static const std::vector<std::string> kModes = {"bus", "train", "ferry",
                                                  "lightrail"};
  return kModes;
}

enum class AttributeKind { kCategorical, kStop, kTime, kDate, kMode };

// Tap-on and tap-off columns are tagged so they can be split apart.
enum class AttributeGroup { kNone, kTapOn, kTapOff };

inline const char* KindName(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::kCategorical:
      return "categorical";
    case AttributeKind::kStop:
      return "stop";
    case AttributeKind::kTime:
      return "time";
    case AttributeKind::kDate:
      return "date";
    case AttributeKind::kMode:
      return "mode";
  }
  return "?";
}

inline const char* GroupName(AttributeGroup group) {
  switch (group) {
    case AttributeGroup::kNone:
      return "none";
    case AttributeGroup::kTapOn:
      return "tap_on";
    case AttributeGroup::kTapOff:
      return "tap_off";
  }
  return "?";
}

// Parses a strictly decimal integer; rejects signs, blanks and trailing junk.
inline std::optional<std::int64_t> ParseInt(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

// A single finite-range attribute. Time attributes hold minutes since
// midnight, binned to a width that divides 1440; every other kind holds an
// explicit list of admissible values.
class Attribute {
 public:
  static Attribute Categorical(std::string name, std::vector<std::string> values,
                               AttributeGroup group = AttributeGroup::kNone) {
    return Attribute(std::move(name), AttributeKind::kCategorical, group,
                     std::move(values), 1);
  }
  static Attribute Stop(std::string name, std::vector<std::string> values,
                        AttributeGroup group = AttributeGroup::kNone) {
    return Attribute(std::move(name), AttributeKind::kStop, group,
                     std::move(values), 1);
  }
  static Attribute Time(std::string name, int bin_width_minutes = 1,
                        AttributeGroup group = AttributeGroup::kNone) {
    return Attribute(std::move(name), AttributeKind::kTime, group, {},
                     bin_width_minutes);
  }
  static Attribute Date(std::string name, std::vector<std::string> values) {
    return Attribute(std::move(name), AttributeKind::kDate,
                     AttributeGroup::kNone, std::move(values), 1);
  }
  static Attribute Mode(std::string name,
                        std::vector<std::string> values = TransportModes()) {
    for (const auto& v : values) {
      if (std::find(TransportModes().begin(), TransportModes().end(), v) ==
          TransportModes().end()) {
        throw InvalidArgumentError("unknown transport mode '" + v + "'");
      }
    }
    return Attribute(std::move(name), AttributeKind::kMode,
                     AttributeGroup::kNone, std::move(values), 1);
  }

  const std::string& name() const { return name_; }
  AttributeKind kind() const { return kind_; }
  AttributeGroup group() const { return group_; }
  int bin_width_minutes() const { return bin_width_; }
  // Explicit value list; empty for time attributes.
  const std::vector<std::string>& values() const { return values_; }

  std::uint64_t RangeSize() const {
    if (kind_ == AttributeKind::kTime) {
      return static_cast<std::uint64_t>(kMinutesPerDay / bin_width_);
    }
    return values_.size();
  }

  std::optional<std::uint64_t> IndexOf(std::string_view value) const {
    if (kind_ == AttributeKind::kTime) {
      const auto minutes = ParseInt(value);
      if (!minutes || *minutes < 0 || *minutes >= kMinutesPerDay ||
          *minutes % bin_width_ != 0) {
        return std::nullopt;
      }
      return static_cast<std::uint64_t>(*minutes / bin_width_);
    }
    const auto it = index_.find(std::string(value));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool Contains(std::string_view value) const { return IndexOf(value).has_value(); }

  std::string ValueAt(std::uint64_t index) const {
    if (index >= RangeSize()) {
      throw InvalidArgumentError("value index out of range for attribute '" +
                                 name_ + "'");
    }
    if (kind_ == AttributeKind::kTime) {
      return std::to_string(index * static_cast<std::uint64_t>(bin_width_));
    }
    return values_[index];
  }

  Attribute WithBinWidth(int width) const {
    return Attribute(name_, kind_, group_, values_, width);
  }
  Attribute WithValues(std::vector<std::string> values) const {
    return Attribute(name_, kind_, group_, std::move(values), bin_width_);
  }

 private:
  Attribute(std::string name, AttributeKind kind, AttributeGroup group,
            std::vector<std::string> values, int bin_width)
      : name_(std::move(name)),
        kind_(kind),
        group_(group),
        bin_width_(bin_width),
        values_(std::move(values)) {
    if (name_.empty()) throw InvalidArgumentError("attribute name is empty");
    if (kind_ == AttributeKind::kTime) {
      if (bin_width_ <= 0 || kMinutesPerDay % bin_width_ != 0) {
        throw InvalidArgumentError("bin width must be a positive divisor of " +
                                   std::to_string(kMinutesPerDay) + ", got " +
                                   std::to_string(bin_width_));
      }
      return;
    }
    if (values_.empty()) {
      throw InvalidArgumentError("attribute '" + name_ + "' has no values");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!index_.emplace(values_[i], i).second) {
        throw InvalidArgumentError("attribute '" + name_ +
                                   "' repeats value '" + values_[i] + "'");
      }
    }
  }

  std::string name_;
  AttributeKind kind_;
  AttributeGroup group_;
  int bin_width_;
  std::vector<std::string> values_;
  std::unordered_map<std::string, std::uint64_t> index_;
};

inline constexpr std::uint64_t kSaturatedSize =
    std::numeric_limits<std::uint64_t>::max();

// Ordered attribute list defining a histogram domain. The domain is the
// cross product of the attribute ranges; it is never materialized here.
class DomainSchema {
 public:
  DomainSchema() = default;
  explicit DomainSchema(std::vector<Attribute> attributes)
      : attributes_(std::move(attributes)) {
    std::unordered_set<std::string> seen;
    for (const auto& a : attributes_) {
      if (!seen.insert(a.name()).second) {
        throw InvalidArgumentError("duplicate attribute name '" + a.name() + "'");
      }
    }
  }

  const std::vector<Attribute>& attributes() const { return attributes_; }
  std::size_t size() const { return attributes_.size(); }
  const Attribute& attribute(std::size_t i) const { return attributes_.at(i); }

  std::optional<std::size_t> Find(std::string_view name) const {
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
      if (attributes_[i].name() == name) return i;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> FindKind(AttributeKind kind) const {
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
      if (attributes_[i].kind() == kind) return i;
    }
    return std::nullopt;
  }

  std::vector<std::string> Names() const {
    std::vector<std::string> names;
    names.reserve(attributes_.size());
    for (const auto& a : attributes_) names.push_back(a.name());
    return names;
  }

  // Product of range sizes, saturating at kSaturatedSize on overflow. The
  // empty schema has exactly one (empty) point.
  std::uint64_t DomainSize() const {
    std::uint64_t size = 1;
    for (const auto& a : attributes_) {
      const std::uint64_t r = a.RangeSize();
      if (r == 0) return 0;
      if (size > kSaturatedSize / r) return kSaturatedSize;
      size *= r;
    }
    return size;
  }

  double Log2DomainSize() const {
    double bits = 0.0;
    for (const auto& a : attributes_) {
      bits += std::log2(static_cast<double>(a.RangeSize()));
    }
    return bits;
  }

  bool Conforms(const Point& point) const {
    if (point.size() != attributes_.size()) return false;
    for (std::size_t i = 0; i < point.size(); ++i) {
      if (!attributes_[i].Contains(point[i])) return false;
    }
    return true;
  }

  // Mixed-radix position of a point, last attribute varying fastest.
  std::optional<std::uint64_t> LinearIndex(const Point& point) const {
    if (point.size() != attributes_.size()) return std::nullopt;
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < point.size(); ++i) {
      const auto digit = attributes_[i].IndexOf(point[i]);
      if (!digit) return std::nullopt;
      index = index * attributes_[i].RangeSize() + *digit;
    }
    return index;
  }

  Point PointAt(std::uint64_t index) const {
    Point point(attributes_.size());
    for (std::size_t i = attributes_.size(); i-- > 0;) {
      const std::uint64_t r = attributes_[i].RangeSize();
      point[i] = attributes_[i].ValueAt(index % r);
      index /= r;
    }
    return point;
  }

  // Sub-schema with the named attributes, in the order given.
  DomainSchema Project(std::span<const std::string> names) const {
    std::vector<Attribute> kept;
    for (const auto& name : names) {
      const auto i = Find(name);
      if (!i) throw InvalidArgumentError("schema has no attribute '" + name + "'");
      kept.push_back(attributes_[*i]);
    }
    return DomainSchema(std::move(kept));
  }

  DomainSchema WithAttribute(std::size_t i, Attribute replacement) const {
    std::vector<Attribute> attrs = attributes_;
    attrs.at(i) = std::move(replacement);
    return DomainSchema(std::move(attrs));
  }

 private:
  std::vector<Attribute> attributes_;
};

inline nlohmann::json SchemaToJson(const DomainSchema& schema) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : schema.attributes()) {
    nlohmann::json j;
    j["name"] = a.name();
    j["kind"] = KindName(a.kind());
    if (a.group() != AttributeGroup::kNone) j["group"] = GroupName(a.group());
    if (a.kind() == AttributeKind::kTime) {
      j["bin_width_minutes"] = a.bin_width_minutes();
    } else {
      j["values"] = a.values();
    }
    attrs.push_back(std::move(j));
  }
  return nlohmann::json{{"attributes", std::move(attrs)}};
}

inline DomainSchema SchemaFromJson(const nlohmann::json& json) {
  try {
    std::vector<Attribute> attrs;
    for (const auto& j : json.at("attributes")) {
      const std::string name = j.at("name").get<std::string>();
      const std::string kind = j.at("kind").get<std::string>();
      AttributeGroup group = AttributeGroup::kNone;
      if (j.contains("group")) {
        const std::string g = j.at("group").get<std::string>();
        if (g == "tap_on") {
          group = AttributeGroup::kTapOn;
        } else if (g == "tap_off") {
          group = AttributeGroup::kTapOff;
        } else if (g != "none") {
          throw InvalidArgumentError("unknown attribute group '" + g + "'");
        }
      }
      auto values = [&] { return j.at("values").get<std::vector<std::string>>(); };
      if (kind == "categorical") {
        attrs.push_back(Attribute::Categorical(name, values(), group));
      } else if (kind == "stop") {
        attrs.push_back(Attribute::Stop(name, values(), group));
      } else if (kind == "time") {
        attrs.push_back(
            Attribute::Time(name, j.value("bin_width_minutes", 1), group));
      } else if (kind == "date") {
        attrs.push_back(Attribute::Date(name, values()));
      } else if (kind == "mode") {
        attrs.push_back(j.contains("values") ? Attribute::Mode(name, values())
                                             : Attribute::Mode(name));
      } else {
        throw InvalidArgumentError("unknown attribute kind '" + kind + "'");
      }
    }
    return DomainSchema(std::move(attrs));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgumentError(std::string("malformed schema: ") + e.what());
  }
}

}  // namespace opaldp

#endif  // OPALDP_SCHEMA_HPP_
