// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "edl/backend.h"
#include "edl/oracle.h"
#include "edl/orchestrator.h"
#include "edl/planner.h"
#include "json.hpp"

namespace edl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using orchestrator::LocalStorage;
using orchestrator::PipelineOptions;

/// A bad flag value or flag combination.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::size_t batch_size = 0;
  bool no_pipeline = false;

  PipelineOptions pipeline() const {
    PipelineOptions p;
    p.workers = workers;
    p.batch_size = batch_size;
    p.pipelined = !no_pipeline;
    return p;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--workers", c.workers, "Worker threads (default: hardware threads)")
      ->check(CLI::PositiveNumber);
  app->add_option("--batch-size", c.batch_size, "Partitions per batch (default: workers)")
      ->check(CLI::PositiveNumber);
  app->add_flag("--no-pipeline", c.no_pipeline, "Run fetch, compute and store sequentially");
}

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw orchestrator::StorageError("cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_text(const fs::path& path) {
  Bytes b = read_file(path);
  return std::string(b.begin(), b.end());
}

void write_new_file(const fs::path& path, ByteView data) {
  if (fs::exists(path)) {
    throw orchestrator::StorageError(path.string() + " already exists; refusing to overwrite");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw orchestrator::StorageError("cannot write " + path.string());
}

// Writes a key blob and its hex sidecar.
void write_key_files(const fs::path& path, const Bytes& blob) {
  const fs::path hex_path = path.string() + ".hex";
  if (fs::exists(path) || fs::exists(hex_path)) {
    throw orchestrator::StorageError(path.string() + " already exists; refusing to overwrite");
  }
  write_new_file(path, blob);
  const std::string hex = to_hex(blob) + "\n";
  write_new_file(hex_path, as_bytes(hex));
  fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write);
  fs::permissions(hex_path, fs::perms::owner_read | fs::perms::owner_write);
}

backend::KeyBlob load_key(const fs::path& path, backend::KeyKind kind) {
  backend::KeyBlob blob = backend::parse_key(backend::key_file_bytes(read_file(path)));
  if (blob.kind != kind) throw FormatError(path.string() + " holds the wrong kind of key");
  return blob;
}

fs::path table_key_path(const fs::path& keys) { return keys / "table.key"; }
fs::path family_key_path(const fs::path& keys, std::string_view id) {
  return keys / ("family-" + std::string(id) + ".key");
}

// --- schema inference for `plan` without a table ---------------------------

bool is_keyword(const std::string& upper) {
  static const std::set<std::string> kWords = {"SELECT", "FROM", "WHERE", "AND", "OR", "NOT",
                                               "IN", "IS", "NULL", "BETWEEN"};
  return kWords.count(upper) != 0;
}

/// Guesses a schema from the SQL text: every identifier is a column, typed
/// Utf8 when compared with a quoted literal and nullable when compared with
/// NULL; everything else is a non-nullable Int64.
Schema infer_schema(const std::vector<std::string>& statements) {
  struct Guess {
    bool utf8 = false;
    bool nullable = false;
  };
  std::vector<std::string> order;
  std::map<std::string, Guess> guesses;
  for (const std::string& sql : statements) {
    struct Tok {
      char kind;  // i ident, s string, n number, o other
      std::string text;
    };
    std::vector<Tok> toks;
    for (std::size_t i = 0; i < sql.size();) {
      const char c = sql[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < sql.size() && (std::isalnum(static_cast<unsigned char>(sql[j])) || sql[j] == '_')) ++j;
        toks.push_back({'i', sql.substr(i, j - i)});
        i = j;
      } else if (c == '\'' || c == '"') {
        std::size_t j = i + 1;
        while (j < sql.size() && sql[j] != c) ++j;
        toks.push_back({'s', ""});
        i = j + 1;
      } else if (c == '?') {
        std::size_t j = i + 1;
        while (j < sql.size() && (std::isalnum(static_cast<unsigned char>(sql[j])) || sql[j] == '_')) ++j;
        toks.push_back({'w', ""});
        i = j;
      } else {
        toks.push_back({'o', std::string(1, c)});
        ++i;
      }
    }
    bool after_from = false;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].kind != 'i') continue;
      std::string up = toks[i].text;
      std::transform(up.begin(), up.end(), up.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
      if (up == "FROM") {
        after_from = true;
        continue;
      }
      if (after_from) {
        after_from = false;
        continue;
      }
      if (is_keyword(up)) continue;
      if (!guesses.count(toks[i].text)) order.push_back(toks[i].text);
      Guess& g = guesses[toks[i].text];
      for (std::size_t k = i + 1; k < toks.size() && k < i + 8; ++k) {
        if (toks[k].kind == 's') {
          g.utf8 = true;
          continue;
        }
        if (toks[k].kind == 'i') {
          std::string kw = toks[k].text;
          std::transform(kw.begin(), kw.end(), kw.begin(),
                         [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
          if (kw == "NULL") {
            g.nullable = true;
            continue;
          }
          if (kw == "AND" || kw == "OR" || !is_keyword(kw)) break;
        }
      }
    }
  }
  std::vector<Column> cols;
  for (const std::string& name : order) {
    cols.push_back({name, guesses[name].utf8 ? ColumnType::kUtf8 : ColumnType::kInt64,
                    guesses[name].nullable});
  }
  if (cols.empty()) throw UsageError("cannot infer a schema; pass --schema");
  return Schema(std::move(cols));
}

const char* atom_kind_name(planner::AtomKind k) {
  switch (k) {
    case planner::AtomKind::kFieldBytes:
      return "FieldBytes";
    case planner::AtomKind::kTopBits:
      return "TopBits";
    case planner::AtomKind::kHashTopBits:
      return "HashTopBits";
  }
  return "?";
}

std::string atom_text(const planner::Atom& a, const Schema& schema) {
  const std::string& name = schema[a.column].name;
  switch (a.kind) {
    case planner::AtomKind::kFieldBytes:
      return name;
    case planner::AtomKind::kTopBits:
      return name + "[top " + std::to_string(a.bits) + "/" + std::to_string(a.total_bits) + "]";
    case planner::AtomKind::kHashTopBits:
      return "sha256(" + name + ")[top " + std::to_string(a.bits) + "/256]";
  }
  return name;
}

json plan_json(const planner::CanonicalPlan& plan, const Schema& schema) {
  json j;
  j["schema_version"] = 1;
  j["family_id"] = plan.family.family_id();
  j["branching_bits"] = plan.family.branching_bits;
  j["sql"] = plan.family.sql;
  json proj = json::array();
  for (std::size_t c : plan.family.projection) proj.push_back(schema[c].name);
  j["projection"] = proj;
  json preds = json::array();
  std::size_t total = 0;
  for (std::size_t i = 0; i < plan.family.predicates.size(); ++i) {
    const planner::PredicateFn& p = plan.family.predicates[i];
    json atoms = json::array();
    for (const planner::Atom& a : p.atoms) {
      atoms.push_back({{"kind", atom_kind_name(a.kind)},
                       {"column", schema[a.column].name},
                       {"bits", a.bits},
                       {"total_bits", a.total_bits}});
    }
    const std::size_t n = i < plan.values.size() ? plan.values[i].size() : 0;
    total += n;
    preds.push_back({{"index", i + 1},
                     {"atoms", atoms},
                     {"wildcards", p.wildcards},
                     {"value_count", n}});
  }
  j["predicates"] = preds;
  j["predicate_count"] = plan.family.predicates.size();
  j["total_values"] = total;
  return j;
}

void print_plan_text(const planner::CanonicalPlan& plan, const Schema& schema, std::ostream& out) {
  out << "family " << plan.family.family_id() << "  (b = " << int(plan.family.branching_bits)
      << ")\n";
  out << "  sql: " << plan.family.sql << "\n  projection:";
  for (std::size_t c : plan.family.projection) out << " " << schema[c].name;
  out << "\n  predicates: " << plan.family.predicates.size() << "\n";
  for (std::size_t i = 0; i < plan.family.predicates.size(); ++i) {
    const planner::PredicateFn& p = plan.family.predicates[i];
    out << "  g" << (i + 1) << " = ";
    for (std::size_t a = 0; a < p.atoms.size(); ++a) {
      if (a > 0) out << " (+) ";
      out << atom_text(p.atoms[a], schema);
    }
    out << " IN ";
    if (!p.wildcards.empty()) {
      out << "{";
      for (std::size_t w = 0; w < p.wildcards.size(); ++w) out << (w ? ", ?" : "?") << p.wildcards[w];
      out << "}";
    }
    out << " [" << (i < plan.values.size() ? plan.values[i].size() : 0) << " values]\n";
  }
}

// --- bindings ---------------------------------------------------------------

void find_wildcard_columns(const planner::Expr& e, std::map<std::string, std::size_t>& out) {
  if (e.kind == planner::Expr::Kind::kCompare) {
    if (e.cmp().wildcard) out[*e.cmp().wildcard] = e.cmp().column;
    return;
  }
  for (const planner::Expr& c : e.children) find_wildcard_columns(c, out);
}

planner::Bindings parse_bindings(const std::vector<std::string>& args,
                                 const planner::CanonicalFamily& family, const Schema& schema) {
  std::map<std::string, std::size_t> columns;
  find_wildcard_columns(planner::parse(family.sql, schema, planner::ParseMode::kFamily).where,
                        columns);
  planner::Bindings out;
  for (const std::string& arg : args) {
    const std::size_t eq = arg.find('=');
    if (eq == std::string::npos) throw UsageError("--bind expects name=v1,v2,...");
    std::string name = arg.substr(0, eq);
    if (!name.empty() && name[0] == '?') name.erase(0, 1);
    auto col = columns.find(name);
    if (col == columns.end()) throw UsageError("family has no wildcard ?" + name);
    const Column& column = schema[col->second];
    std::vector<Value>& values = out[name];
    const std::string list = arg.substr(eq + 1);
    if (list.empty()) continue;
    for (const auto& field : parse_csv_record_with_nulls(list)) {
      if (!field) {
        values.emplace_back(std::monostate{});
      } else if (column.type == ColumnType::kUtf8) {
        values.emplace_back(*field);
      } else {
        try {
          std::size_t used = 0;
          const long long v = std::stoll(*field, &used);
          if (used != field->size()) throw std::invalid_argument("trailing");
          values.emplace_back(static_cast<std::int64_t>(v));
        } catch (const std::exception&) {
          throw UsageError("'" + *field + "' is not an integer for ?" + name);
        }
      }
    }
  }
  return out;
}

// --- bench ------------------------------------------------------------------

struct BenchConfig {
  std::string what = "all";
  std::size_t rows = 100000;
  std::size_t partitions = 4;
  std::uint8_t tag_length = 4;
  std::uint8_t branching_bits = 8;
  std::size_t cache = 512;
  std::uint64_t seed = 1;
  bool json_out = false;
};

int run_bench(const BenchConfig& cfg, const Common& common, std::ostream& out) {
  const Schema schema({{"id", ColumnType::kInt64, false},
                       {"bucket", ColumnType::kInt64, false},
                       {"name", ColumnType::kUtf8, false}});
  std::mt19937_64 rng(cfg.seed);
  std::vector<PlainPartition> parts(cfg.partitions);
  std::size_t plain_bytes = 0;
  std::int64_t next_id = 0;
  for (std::size_t p = 0; p < cfg.partitions; ++p) {
    parts[p].partition_id = static_cast<std::uint32_t>(p + 1);
    const std::size_t n = cfg.rows / cfg.partitions + (p < cfg.rows % cfg.partitions ? 1 : 0);
    for (std::size_t r = 0; r < n; ++r) {
      std::string name(12, 'a');
      for (char& ch : name) ch = static_cast<char>('a' + rng() % 26);
      Row row{next_id++, static_cast<std::int64_t>(rng() % 64), std::move(name)};
      for (std::size_t c = 0; c < row.size(); ++c) plain_bytes += encode_cell(row[c], schema[c]).size();
      parts[p].rows.push_back(std::move(row));
    }
  }
  using Clock = std::chrono::steady_clock;
  auto seconds = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };
  const double mb = static_cast<double>(plain_bytes) / 1e6;
  json report;
  report["schema_version"] = 1;
  report["rows"] = cfg.rows;
  report["partitions"] = cfg.partitions;
  report["workers"] = common.workers;
  report["plaintext_bytes"] = plain_bytes;
  json stages = json::object();

  orchestrator::MemoryStorage storage;
  const crypto::SymKey table_key = crypto::SymKey::random();
  auto t0 = Clock::now();
  orchestrator::run_encrypt_table(
      "bench", schema, parts.size(), [&](std::size_t i) { return parts[i]; }, storage, table_key,
      common.pipeline());
  auto t1 = Clock::now();
  stages["encrypt"] = {{"seconds", seconds(t0, t1)}, {"mb_per_s", mb / seconds(t0, t1)}};

  const bool want_family = cfg.what != "encrypt";
  if (want_family) {
    orchestrator::FamilyParams fp;
    fp.tag_length = cfg.tag_length;
    fp.branching_bits = cfg.branching_bits;
    fp.cache_capacity = cfg.cache;
    t0 = Clock::now();
    orchestrator::AddFamilyResult fam = orchestrator::run_add_family(
        storage, table_key, "SELECT * FROM bench WHERE bucket = ?b", fp, common.pipeline());
    t1 = Clock::now();
    stages["addfamily"] = {{"seconds", seconds(t0, t1)}, {"mb_per_s", mb / seconds(t0, t1)}};
    if (cfg.what == "all" || cfg.what == "reveal") {
      const backend::ViewKeySet keys = orchestrator::run_view_gen(
          storage, fam.family_id, fam.family_key, planner::Bindings{{"b", {std::int64_t{0}}}});
      t0 = Clock::now();
      const orchestrator::RevealTableResult res = orchestrator::run_reveal_view(
          storage, keys, std::nullopt, std::nullopt, common.pipeline());
      t1 = Clock::now();
      stages["reveal"] = {{"seconds", seconds(t0, t1)},
                          {"mb_per_s", mb / seconds(t0, t1)},
                          {"rows_revealed", res.stats.rows_emitted}};
    }
  }
  report["stages"] = stages;
  if (cfg.json_out) {
    out << report.dump(2) << "\n";
  } else {
    out << "plaintext: " << plain_bytes << " bytes, " << cfg.rows << " rows, " << cfg.partitions
        << " partitions, " << common.workers << " workers\n";
    for (const auto& [name, s] : stages.items()) {
      out << "  " << name << ": " << s["seconds"].get<double>() << " s, "
          << s["mb_per_s"].get<double>() << " MB/s\n";
    }
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"edl: encrypted, view-based access control for partitioned tables"};
  app.name(args.empty() ? "edl" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);
  app.set_version_flag("--version", "edl 1.0.0");

  Common common;

  // encrypt-table
  std::string src_dir, dst_dir, keys_dir, table_name;
  bool no_header = false;
  bool print_keys = false;
  auto* enc_cmd = app.add_subcommand("encrypt-table", "Encrypt a CSV table under a fresh table key");
  enc_cmd->add_option("--src", src_dir, "Directory with schema.json and one .csv per partition")
      ->required();
  enc_cmd->add_option("--dst", dst_dir, "Destination table directory (must not hold a table)")
      ->required();
  enc_cmd->add_option("--keys", keys_dir, "Directory receiving table.key")->required();
  enc_cmd->add_option("--name", table_name, "Table name (default: source directory name)");
  enc_cmd->add_flag("--no-header", no_header, "CSV files have no header row");
  enc_cmd->add_flag("--insecure-print-keys", print_keys, "Also print key material to stdout");
  add_common(enc_cmd, common);

  // add-family
  std::string table_dir, family_sql;
  int tag_length = 4;
  int branching_bits = 8;
  std::size_t cache = 512;
  auto* fam_cmd = app.add_subcommand("add-family", "Instantiate a view family on a table");
  fam_cmd->add_option("--table", table_dir, "Table directory")->required();
  fam_cmd->add_option("--keys", keys_dir, "Directory holding table.key; receives the family key")
      ->required();
  fam_cmd->add_option("--family", family_sql, "Family SQL with ?wildcards")->required();
  fam_cmd->add_option("--tag-length", tag_length, "Tag length in bytes")
      ->check(CLI::Range(1, 16));
  fam_cmd->add_option("--branching-bits", branching_bits, "log2 of the range-tree branching factor")
      ->check(CLI::IsMember({1, 2, 4, 8, 16}));
  fam_cmd->add_option("--cache", cache, "Selection cache capacity (0 disables)");
  fam_cmd->add_flag("--insecure-print-keys", print_keys, "Also print key material to stdout");
  add_common(fam_cmd, common);

  // view-gen
  std::string family_id, view_sql, out_path;
  std::vector<std::string> binds;
  auto* vg_cmd = app.add_subcommand("view-gen", "Mint the key set for one view of a family");
  vg_cmd->add_option("--table", table_dir, "Table directory")->required();
  vg_cmd->add_option("--keys", keys_dir, "Directory holding family-<id>.key")->required();
  vg_cmd->add_option("--family-id", family_id, "Family id")->required();
  auto* view_opt = vg_cmd->add_option("--view", view_sql, "View SQL with literal values");
  auto* bind_opt = vg_cmd->add_option("--bind", binds, "Wildcard binding name=v1,v2 (repeatable)");
  view_opt->excludes(bind_opt);
  vg_cmd->add_option("--out", out_path, "View key set file to write")->required();
  vg_cmd->add_flag("--insecure-print-keys", print_keys, "Also print key material to stdout");

  // reveal-view
  std::string view_keys_path, out_dir, fil;
  bool no_tags = false;
  auto* rv_cmd = app.add_subcommand("reveal-view", "Decrypt the rows a view key set grants");
  rv_cmd->add_option("--table", table_dir, "Table directory")->required();
  rv_cmd->add_option("--view-keys", view_keys_path, "View key set file")->required();
  rv_cmd->add_option("--out", out_dir, "Local output directory for part-NNNNN.csv")->required();
  rv_cmd->add_option("--fil", fil, "Inclusive partition range FIRST:LAST");
  rv_cmd->add_flag("--no-tags", no_tags, "Try every key on every row (slow reference path)");
  add_common(rv_cmd, common);

  // plan
  std::string schema_path;
  bool json_out = false;
  auto* plan_cmd = app.add_subcommand("plan", "Show the canonical form of a family or view");
  plan_cmd->add_option("--family", family_sql, "Family SQL (wildcards and/or literals)")
      ->required();
  plan_cmd->add_option("--view", view_sql, "View SQL to plan against the family");
  plan_cmd->add_option("--schema", schema_path, "schema.json (default: table or inferred)");
  plan_cmd->add_option("--table", table_dir, "Take the schema from this table's manifest");
  plan_cmd->add_option("--branching-bits", branching_bits, "log2 of the range-tree branching factor")
      ->check(CLI::IsMember({1, 2, 4, 8, 16}));
  plan_cmd->add_flag("--json", json_out, "Machine-readable output");

  // check
  auto* check_cmd = app.add_subcommand(
      "check", "Compare reveal-view output with a plaintext evaluation of the view");
  check_cmd->add_option("--table", table_dir, "Table directory")->required();
  check_cmd->add_option("--keys", keys_dir, "Directory holding table.key")->required();
  check_cmd->add_option("--view-keys", view_keys_path, "View key set file")->required();
  check_cmd->add_option("--view", view_sql, "View SQL the key set was minted for")->required();

  // bench
  BenchConfig bench;
  auto* bench_cmd = app.add_subcommand("bench", "Synthetic throughput benchmark (in memory)");
  bench_cmd->add_option("what", bench.what, "Stages to run")
      ->check(CLI::IsMember({"all", "encrypt", "addfamily", "reveal"}));
  bench_cmd->add_option("--rows", bench.rows, "Total rows")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--partitions", bench.partitions, "Partitions")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--tag-length", tag_length, "Tag length in bytes")->check(CLI::Range(1, 16));
  bench_cmd->add_option("--branching-bits", branching_bits, "log2 branching factor")
      ->check(CLI::IsMember({1, 2, 4, 8, 16}));
  bench_cmd->add_option("--cache", cache, "Selection cache capacity");
  bench_cmd->add_option("--seed", bench.seed, "Data generator seed");
  bench_cmd->add_flag("--json", bench.json_out, "Machine-readable output");
  add_common(bench_cmd, common);

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("edl");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*enc_cmd) {
      const orchestrator::CsvSource src = orchestrator::open_csv_source(src_dir, !no_header);
      if (table_name.empty()) table_name = fs::path(src_dir).lexically_normal().filename().string();
      if (table_name.empty()) table_name = "table";
      const fs::path key_path = table_key_path(keys_dir);
      if (fs::exists(key_path)) {
        throw orchestrator::StorageError(key_path.string() + " already exists; refusing to overwrite");
      }
      LocalStorage dst(dst_dir);
      const crypto::SymKey key = crypto::SymKey::random();
      const TableManifest m = orchestrator::run_encrypt_table(
          table_name, src.schema, src.files.size(), [&](std::size_t i) { return src.load(i); },
          dst, key, common.pipeline());
      write_key_files(key_path, backend::serialize_key({backend::KeyKind::kTable, "", key}));
      std::size_t rows = 0;
      for (const PartitionInfo& p : m.partitions) rows += p.rows;
      out << "encrypted " << m.partitions.size() << " partitions (" << rows << " rows) into "
          << dst_dir << "\ntable key: " << key_path.string() << "\n";
      if (print_keys) out << "table key hex: " << key.hex() << "\n";
      return kExitOk;
    }
    if (*fam_cmd) {
      LocalStorage table(table_dir);
      const backend::KeyBlob tk = load_key(table_key_path(keys_dir), backend::KeyKind::kTable);
      orchestrator::FamilyParams params;
      params.tag_length = static_cast<std::uint8_t>(tag_length);
      params.branching_bits = static_cast<std::uint8_t>(branching_bits);
      params.cache_capacity = cache;
      // Plan first so the family key path is known before any work happens.
      const TableManifest m = orchestrator::load_manifest(table);
      planner::PlannerParams pp;
      pp.branching_bits = params.branching_bits;
      const std::string id = planner::plan_family(family_sql, m.schema, pp).family_id();
      const fs::path key_path = family_key_path(keys_dir, id);
      if (fs::exists(key_path)) {
        throw orchestrator::StorageError(key_path.string() + " already exists; refusing to overwrite");
      }
      const orchestrator::AddFamilyResult res =
          orchestrator::run_add_family(table, tk.key, family_sql, params, common.pipeline());
      write_key_files(key_path, backend::serialize_key(
                                    {backend::KeyKind::kFamily, res.family_id, res.family_key}));
      out << "family " << res.family_id << " (" << res.family.predicates.size()
          << " predicates)\nfamily key: " << key_path.string() << "\n";
      if (print_keys) out << "family key hex: " << res.family_key.hex() << "\n";
      return kExitOk;
    }
    if (*vg_cmd) {
      if (view_sql.empty() == binds.empty() && !(view_sql.empty() && binds.empty())) {
        throw UsageError("give either --view or --bind");
      }
      LocalStorage table(table_dir);
      const backend::KeyBlob fk = load_key(family_key_path(keys_dir, family_id),
                                           backend::KeyKind::kFamily);
      if (fk.family_id != family_id) throw FormatError("family key file belongs to another family");
      backend::ViewKeySet keys;
      if (!view_sql.empty()) {
        keys = orchestrator::run_view_gen(table, family_id, fk.key, view_sql);
      } else {
        const TableManifest m = orchestrator::load_manifest(table);
        const planner::CanonicalFamily fam = orchestrator::manifest_family(m, family_id);
        keys = orchestrator::run_view_gen(table, family_id, fk.key,
                                          parse_bindings(binds, fam, m.schema));
      }
      write_key_files(out_path, backend::serialize_view_keys(keys));
      out << "view key set: " << keys.size() << " keys over " << keys.keys.size()
          << " predicates -> " << out_path << "\n";
      if (print_keys) {
        for (std::size_t j = 0; j < keys.keys.size(); ++j) {
          for (const auto& e : keys.keys[j]) out << "g" << (j + 1) << " " << e.key.hex() << "\n";
        }
      }
      return kExitOk;
    }
    if (*rv_cmd) {
      LocalStorage table(table_dir);
      const backend::ViewKeySet keys =
          backend::parse_view_keys(backend::key_file_bytes(read_file(view_keys_path)));
      std::optional<orchestrator::PartitionFilter> filter;
      if (!fil.empty()) {
        try {
          filter = orchestrator::parse_filter(fil);
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());
        }
      }
      backend::RevealOptions ro;
      ro.use_tags = !no_tags;
      const orchestrator::RevealTableResult res = orchestrator::run_reveal_view(
          table, keys, filter, fs::path(out_dir), common.pipeline(), ro);
      out << "revealed " << res.stats.rows_emitted << " rows from " << res.partitions.size()
          << " partitions into " << out_dir << "\n";
      return kExitOk;
    }
    if (*plan_cmd) {
      Schema schema;
      if (!schema_path.empty()) {
        schema = schema_from_json(read_text(schema_path));
      } else if (!table_dir.empty()) {
        LocalStorage table(table_dir);
        schema = orchestrator::load_manifest(table).schema;
      } else {
        std::vector<std::string> stmts{family_sql};
        if (!view_sql.empty()) stmts.push_back(view_sql);
        schema = infer_schema(stmts);
      }
      planner::PlannerParams pp;
      pp.branching_bits = static_cast<std::uint8_t>(branching_bits);
      const planner::ViewFamilyAst ast = planner::parse(family_sql, schema, planner::ParseMode::kAny);
      planner::CanonicalPlan plan = planner::plan(ast, schema, pp);
      json j = plan_json(plan, schema);
      if (!view_sql.empty()) {
        const planner::CanonicalView view = planner::plan_view(view_sql, plan.family, schema, pp);
        json counts = json::array();
        for (const auto& v : view.values) counts.push_back(v.size());
        j["view"] = {{"value_counts", counts}, {"total_values", view.total_values()}};
        plan.values = view.values;
      }
      if (json_out) {
        out << j.dump(2) << "\n";
      } else {
        print_plan_text(plan, schema, out);
      }
      return kExitOk;
    }
    if (*check_cmd) {
      LocalStorage table(table_dir);
      const backend::KeyBlob tk = load_key(table_key_path(keys_dir), backend::KeyKind::kTable);
      const backend::ViewKeySet keys =
          backend::parse_view_keys(backend::key_file_bytes(read_file(view_keys_path)));
      const TableManifest m = orchestrator::load_manifest(table);
      const planner::CanonicalFamily fam = orchestrator::manifest_family(m, keys.family_id);
      const planner::CanonicalView view = planner::plan_view(view_sql, fam, m.schema);
      const orchestrator::RevealTableResult res =
          orchestrator::run_reveal_view(table, keys, std::nullopt, std::nullopt);
      std::size_t mismatches = 0;
      std::size_t rows = 0;
      for (const orchestrator::PartitionOutput& po : res.partitions) {
        const std::optional<Bytes> file = table.get(orchestrator::partition_object_name(po.partition_id));
        const PlainPartition plain =
            backend::decrypt_partition(parse_partition(*file, &m.schema), m.schema, tk.key);
        const std::vector<Row> expected = oracle::eval_view(view_sql, m.schema, plain.rows);
        const std::vector<Row> canonical = oracle::eval_canonical(fam, view, m.schema, plain.rows);
        rows += expected.size();
        if (expected != po.rows || canonical != expected) {
          ++mismatches;
          err << "partition " << po.partition_id << ": oracle " << expected.size()
              << " rows, canonical " << canonical.size() << " rows, decrypted " << po.rows.size()
              << " rows\n";
        }
      }
      if (mismatches != 0) {
        out << "MISMATCH in " << mismatches << " partitions\n";
        return kExitData;
      }
      out << "OK: " << rows << " rows across " << res.partitions.size()
          << " partitions match the plaintext evaluation\n";
      return kExitOk;
    }
    if (*bench_cmd) {
      bench.tag_length = static_cast<std::uint8_t>(tag_length);
      bench.branching_bits = static_cast<std::uint8_t>(branching_bits);
      bench.cache = cache;
      return run_bench(bench, common, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace edl::cli
