// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include "edl/table.h"
#include "json.hpp"

namespace edl {
namespace {

using nlohmann::json;

json schema_json(const Schema& schema) {
  json cols = json::array();
  for (const Column& c : schema.columns()) {
    cols.push_back({{"name", c.name}, {"type", column_type_name(c.type)}, {"nullable", c.nullable}});
  }
  return cols;
}

Schema schema_from(const json& cols) {
  if (!cols.is_array()) throw FormatError("schema must be an array of columns");
  std::vector<Column> out;
  for (const json& c : cols) {
    Column col;
    col.name = c.at("name").get<std::string>();
    col.type = column_type_from_name(c.at("type").get<std::string>());
    col.nullable = c.value("nullable", false);
    out.push_back(std::move(col));
  }
  return Schema(std::move(out));
}

}  // namespace

const FamilyRecord* TableManifest::find_family(std::string_view id) const {
  for (const FamilyRecord& f : families) {
    if (f.family_id == id) return &f;
  }
  return nullptr;
}

std::string TableManifest::to_json() const {
  json j;
  j["format_version"] = format_version;
  j["table"] = table_name;
  j["schema"] = schema_json(schema);
  json parts = json::array();
  for (const PartitionInfo& p : partitions) parts.push_back({{"id", p.id}, {"rows", p.rows}});
  j["partitions"] = parts;
  json fams = json::array();
  for (const FamilyRecord& f : families) {
    fams.push_back({{"family_id", f.family_id},
                    {"sql", f.sql},
                    {"canonical", f.canonical_hex},
                    {"tag_length_bytes", f.tag_length_bytes},
                    {"branching_factor_bits", f.branching_factor_bits}});
  }
  j["families"] = fams;
  return j.dump(2) + "\n";
}

TableManifest TableManifest::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  try {
    TableManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kFormatVersion) {
      throw FormatError("unsupported manifest version " + std::to_string(m.format_version));
    }
    m.table_name = j.at("table").get<std::string>();
    m.schema = schema_from(j.at("schema"));
    std::set<std::uint32_t> ids;
    for (const json& p : j.at("partitions")) {
      PartitionInfo info{p.at("id").get<std::uint32_t>(), p.at("rows").get<std::uint32_t>()};
      if (info.id == 0 || !ids.insert(info.id).second) throw FormatError("bad partition census");
      m.partitions.push_back(info);
    }
    std::set<std::string> fids;
    for (const json& f : j.at("families")) {
      FamilyRecord rec;
      rec.family_id = f.at("family_id").get<std::string>();
      rec.sql = f.value("sql", "");
      rec.canonical_hex = f.at("canonical").get<std::string>();
      rec.tag_length_bytes = f.at("tag_length_bytes").get<std::uint8_t>();
      rec.branching_factor_bits = f.at("branching_factor_bits").get<std::uint8_t>();
      if (!fids.insert(rec.family_id).second) {
        throw FormatError("duplicate family id " + rec.family_id);
      }
      m.families.push_back(std::move(rec));
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

std::string schema_to_json(const Schema& schema) { return schema_json(schema).dump(2) + "\n"; }

Schema schema_from_json(std::string_view text) {
  try {
    json j = json::parse(text);
    if (j.is_object()) return schema_from(j.at("columns"));
    return schema_from(j);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed schema: ") + e.what());
  }
}

}  // namespace edl
