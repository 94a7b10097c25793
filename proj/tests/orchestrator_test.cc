// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "edl/oracle.h"
#include "edl/orchestrator.h"

namespace edl::orchestrator {
namespace {

namespace fs = std::filesystem;
using crypto::SymKey;

Schema schema() {
  return Schema({{"id", ColumnType::kInt64, false},
                 {"dept", ColumnType::kUtf8, false},
                 {"salary", ColumnType::kInt64, true}});
}

std::vector<PlainPartition> make_partitions(std::size_t n, std::size_t rows, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::vector<PlainPartition> out(n);
  std::int64_t id = 0;
  for (std::size_t p = 0; p < n; ++p) {
    out[p].partition_id = static_cast<std::uint32_t>(p + 1);
    for (std::size_t r = 0; r < rows; ++r) {
      Value salary = rng() % 10 == 0 ? Value{} : Value{static_cast<std::int64_t>(rng() % 100)};
      out[p].rows.push_back({id++, std::string(1, 'a' + rng() % 6), std::move(salary)});
    }
  }
  return out;
}

struct Fixture {
  std::vector<PlainPartition> parts;
  SymKey tk = SymKey::random();
  MemoryStorage storage;

  explicit Fixture(std::size_t n = 4, std::size_t rows = 50) : parts(make_partitions(n, rows)) {
    run_encrypt_table("emp", schema(), parts.size(), [&](std::size_t i) { return parts[i]; },
                      storage, tk);
  }

  std::vector<Row> expected(const std::string& view, std::uint32_t first = 1,
                            std::uint32_t last = UINT32_MAX) const {
    std::vector<Row> out;
    for (const PlainPartition& p : parts) {
      if (p.partition_id < first || p.partition_id > last) continue;
      for (Row& r : oracle::eval_view(view, schema(), p.rows)) out.push_back(std::move(r));
    }
    return out;
  }
};

std::vector<Row> flatten(const RevealTableResult& res) {
  std::vector<Row> out;
  for (const PartitionOutput& p : res.partitions) out.insert(out.end(), p.rows.begin(), p.rows.end());
  return out;
}

constexpr const char* kFamily = "SELECT * FROM emp WHERE dept = ?d OR salary < ?s";
constexpr const char* kView = "SELECT * FROM emp WHERE dept IN ('a', 'b') OR salary < 20";

TEST(EncryptTable, WritesManifestAndPartitions) {
  Fixture f(3, 10);
  const TableManifest m = load_manifest(f.storage);
  EXPECT_EQ(m.table_name, "emp");
  EXPECT_EQ(m.partitions.size(), 3u);
  EXPECT_EQ(f.storage.list(), (std::vector<std::string>{"manifest.json", "part-00001.mep",
                                                        "part-00002.mep", "part-00003.mep"}));
  const Schema s = schema();
  const EncryptedPartition enc = parse_partition(*f.storage.get("part-00002.mep"), &s);
  EXPECT_EQ(backend::decrypt_partition(enc, s, f.tk), f.parts[1]);
}

TEST(EncryptTable, RefusesNonEmptyDestination) {
  Fixture f(1, 3);
  EXPECT_THROW(run_encrypt_table("emp", schema(), 1, [&](std::size_t i) { return f.parts[i]; },
                                 f.storage, f.tk),
               StorageError);
}

TEST(EndToEnd, RevealMatchesPlaintextView) {
  Fixture f;
  const AddFamilyResult fam = run_add_family(f.storage, f.tk, kFamily);
  const backend::ViewKeySet keys = run_view_gen(f.storage, fam.family_id, fam.family_key, kView);
  EXPECT_EQ(flatten(run_reveal_view(f.storage, keys, std::nullopt, std::nullopt)), f.expected(kView));
  // Bindings give the same key set as the equivalent literal view.
  const backend::ViewKeySet bound = run_view_gen(
      f.storage, fam.family_id, fam.family_key,
      planner::Bindings{{"d", {std::string("a"), std::string("b")}}, {"s", {std::int64_t{20}}}});
  EXPECT_EQ(backend::serialize_view_keys(bound), backend::serialize_view_keys(keys));
}

TEST(EndToEnd, DuplicateFamilyIsRejected) {
  Fixture f(1, 5);
  run_add_family(f.storage, f.tk, kFamily);
  EXPECT_THROW(run_add_family(f.storage, f.tk, kFamily), std::invalid_argument);
}

TEST(EndToEnd, UnknownFamilyIsRejected) {
  Fixture f(1, 5);
  EXPECT_THROW(run_view_gen(f.storage, "0000000000000000", SymKey::random(), kView),
               std::invalid_argument);
}

TEST(PartitionFilter, ParsesRanges) {
  EXPECT_EQ(parse_filter("2:5").first, 2u);
  EXPECT_EQ(parse_filter("2:5").last, 5u);
  EXPECT_EQ(parse_filter("3").last, 3u);
  EXPECT_THROW(parse_filter("5:2"), std::invalid_argument);
  EXPECT_THROW(parse_filter("0:2"), std::invalid_argument);
  EXPECT_THROW(parse_filter("a:b"), std::invalid_argument);
  EXPECT_THROW(parse_filter(""), std::invalid_argument);
}

TEST(PartitionFilter, FetchesOnlySelectedPartitions) {
  Fixture f(5, 20);
  const AddFamilyResult fam = run_add_family(f.storage, f.tk, kFamily);
  const backend::ViewKeySet keys = run_view_gen(f.storage, fam.family_id, fam.family_key, kView);
  f.storage.clear_access_log();
  const RevealTableResult res = run_reveal_view(f.storage, keys, parse_filter("2:3"), std::nullopt);
  std::vector<std::string> log = f.storage.access_log();
  std::sort(log.begin(), log.end());
  EXPECT_EQ(log, (std::vector<std::string>{"manifest.json", "part-00002.mep", "part-00003.mep"}));
  EXPECT_EQ(flatten(res), f.expected(kView, 2, 3));
  ASSERT_EQ(res.partitions.size(), 2u);
  EXPECT_EQ(res.partitions[0].partition_id, 2u);
}

TEST(Pipeline, ScheduleDoesNotChangeOutputs) {
  const std::vector<PlainPartition> parts = make_partitions(7, 40, 5);
  const SymKey tk = SymKey::random(), fk = SymKey::random(), seed = SymKey::random();
  std::vector<std::map<std::string, Bytes>> stores;
  std::vector<std::vector<Row>> reveals;
  const PipelineOptions schedules[] = {
      {1, 0, false, 2}, {1, 0, true, 2}, {3, 0, true, 1}, {4, 2, true, 3}, {2, 5, false, 2}};
  for (const PipelineOptions& p : schedules) {
    MemoryStorage s;
    run_encrypt_table("emp", schema(), parts.size(), [&](std::size_t i) { return parts[i]; }, s, tk, p);
    FamilyParams fp;
    fp.family_key = fk;
    fp.projection_seed = seed;
    const AddFamilyResult fam = run_add_family(s, tk, kFamily, fp, p);
    const backend::ViewKeySet keys = run_view_gen(s, fam.family_id, fam.family_key, kView);
    reveals.push_back(flatten(run_reveal_view(s, keys, std::nullopt, std::nullopt, p)));
    // Table encryption is randomized only through the table key, so files match.
    std::map<std::string, Bytes> files;
    for (const std::string& name : s.list()) files[name] = *s.get(name);
    stores.push_back(std::move(files));
  }
  for (std::size_t i = 1; i < stores.size(); ++i) {
    EXPECT_EQ(stores[i], stores[0]) << "schedule " << i;
    EXPECT_EQ(reveals[i], reveals[0]) << "schedule " << i;
  }
}

TEST(Commit, CrashAtEveryMutationLeavesOldOrNewTable) {
  const std::vector<PlainPartition> parts = make_partitions(3, 10, 11);
  const SymKey tk = SymKey::random();
  for (std::size_t crash_at = 0;; ++crash_at) {
    MemoryStorage s;
    run_encrypt_table("emp", schema(), parts.size(), [&](std::size_t i) { return parts[i]; }, s, tk);
    const Bytes old_manifest = *s.get(kManifestName);
    std::map<std::string, Bytes> old_files;
    for (const std::string& name : s.list()) old_files[name] = *s.get(name);

    s.fail_after_mutations(crash_at);
    bool crashed = false;
    AddFamilyResult fam;
    try {
      fam = run_add_family(s, tk, kFamily);
    } catch (const StorageError&) {
      crashed = true;
    }
    s.fail_after_mutations(SIZE_MAX);
    recover(s);

    std::vector<std::string> names = s.list();
    for (const std::string& n : names) EXPECT_FALSE(n.ends_with(kStagingSuffix)) << n;
    EXPECT_FALSE(s.exists(kPendingManifestName));
    const TableManifest m = load_manifest(s);
    if (m.families.empty()) {
      // Rolled back: every object is byte-identical to before.
      EXPECT_EQ(*s.get(kManifestName), old_manifest);
      std::map<std::string, Bytes> files;
      for (const std::string& name : names) files[name] = *s.get(name);
      EXPECT_EQ(files, old_files) << "crash at " << crash_at;
    } else {
      // Rolled forward: every partition carries the family.
      const Schema sc = schema();
      for (const PartitionInfo& p : m.partitions) {
        const EncryptedPartition enc = parse_partition(*s.get(partition_object_name(p.id)), &sc);
        EXPECT_NE(enc.find_family(m.families[0].family_id), nullptr) << "crash at " << crash_at;
      }
      if (!crashed) {
        const backend::ViewKeySet keys = run_view_gen(s, fam.family_id, fam.family_key, kView);
        std::vector<Row> want;
        for (const PlainPartition& p : parts) {
          for (Row& r : oracle::eval_view(kView, sc, p.rows)) want.push_back(std::move(r));
        }
        EXPECT_EQ(flatten(run_reveal_view(s, keys, std::nullopt, std::nullopt)), want);
      }
    }
    if (!crashed) break;
    ASSERT_LT(crash_at, 100u);
  }
}

TEST(Storage, LocalStoragePutIsAtomicAndListsVisibleObjects) {
  const fs::path dir = fs::temp_directory_path() / ("edl-storage-" + SymKey::random().hex());
  {
    LocalStorage s(dir);
    s.put("a", as_bytes("hello"));
    s.put("a", as_bytes("bye"));
    s.rename("a", "b");
    EXPECT_EQ(s.list(), std::vector<std::string>{"b"});
    EXPECT_EQ(*s.get("b"), Bytes(as_bytes("bye").begin(), as_bytes("bye").end()));
    EXPECT_FALSE(s.get("a").has_value());
    s.remove("b");
    EXPECT_TRUE(s.list().empty());
    s.fail_after_mutations(0);
    EXPECT_THROW(s.put("c", as_bytes("x")), StorageError);
    s.put("c", as_bytes("x"));
    EXPECT_TRUE(s.exists("c"));
  }
  fs::remove_all(dir);
}

TEST(Csv, EncryptsBoatsDirectoryAndWritesRevealCsv) {
  const CsvSource src = open_csv_source(EDL_TEST_DATA_DIR "/boats", true);
  ASSERT_EQ(src.files.size(), 1u);
  MemoryStorage s;
  const SymKey tk = SymKey::random();
  run_encrypt_table("boats", src.schema, src.files.size(), [&](std::size_t i) { return src.load(i); },
                    s, tk);
  const AddFamilyResult fam =
      run_add_family(s, tk, "SELECT bname, color FROM boats WHERE bname IN ?x_1 OR color IN ?x_2");
  const backend::ViewKeySet keys = run_view_gen(
      s, fam.family_id, fam.family_key,
      planner::Bindings{{"x_1", {std::string("Interlake")}}, {"x_2", {std::string("red")}}});
  const fs::path out = fs::temp_directory_path() / ("edl-reveal-" + SymKey::random().hex());
  const RevealTableResult res = run_reveal_view(s, keys, std::nullopt, out);
  EXPECT_EQ(res.header, (std::vector<std::string>{"bname", "color"}));
  std::ifstream in(out / "part-00001.csv");
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), "bname,color\r\nInterlake,blue\r\nInterlake,red\r\nMarine,red\r\n");
  fs::remove_all(out);
}

}  // namespace
}  // namespace edl::orchestrator
