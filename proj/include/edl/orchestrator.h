// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>

#include "edl/backend.h"
#include "edl/planner.h"
#include "edl/table.h"

namespace edl::orchestrator {

/// Raised by storage backends; also used for injected faults.
class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Whole-object storage. `put` is atomic: readers see the old object or the
/// new one, never a prefix. Every get is recorded in the access log.
class Storage {
 public:
  virtual ~Storage() = default;

  std::vector<std::string> list();
  std::optional<Bytes> get(const std::string& name);
  void put(const std::string& name, ByteView data);
  void rename(const std::string& from, const std::string& to);
  void remove(const std::string& name);
  bool exists(const std::string& name);

  std::vector<std::string> access_log() const;
  void clear_access_log();
  /// Makes the n-th mutating call from now (put/rename/remove, 0-based)
  /// throw StorageError; models a crash at that point.
  void fail_after_mutations(std::size_t n);

 protected:
  virtual std::vector<std::string> do_list() = 0;
  virtual std::optional<Bytes> do_get(const std::string& name) = 0;
  virtual void do_put(const std::string& name, ByteView data) = 0;
  virtual void do_rename(const std::string& from, const std::string& to) = 0;
  virtual void do_remove(const std::string& name) = 0;

 private:
  void before_mutation();

  mutable std::mutex mu_;
  std::vector<std::string> log_;
  std::optional<std::size_t> fail_countdown_;
};

/// A directory on the local filesystem; puts write a temporary sibling and
/// rename it into place.
class LocalStorage : public Storage {
 public:
  explicit LocalStorage(std::filesystem::path root);
  const std::filesystem::path& root() const { return root_; }

 protected:
  std::vector<std::string> do_list() override;
  std::optional<Bytes> do_get(const std::string& name) override;
  void do_put(const std::string& name, ByteView data) override;
  void do_rename(const std::string& from, const std::string& to) override;
  void do_remove(const std::string& name) override;

 private:
  std::filesystem::path root_;
};

class MemoryStorage : public Storage {
 protected:
  std::vector<std::string> do_list() override;
  std::optional<Bytes> do_get(const std::string& name) override;
  void do_put(const std::string& name, ByteView data) override;
  void do_rename(const std::string& from, const std::string& to) override;
  void do_remove(const std::string& name) override;

 private:
  std::mutex mu_;
  std::map<std::string, Bytes> objects_;
};

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kPendingManifestName = "manifest.json.pending";
inline constexpr const char* kStagingSuffix = ".tmp";

std::string partition_object_name(std::uint32_t id);

struct PipelineOptions {
  std::size_t workers = 1;
  std::size_t batch_size = 0;  // 0: one partition per worker
  bool pipelined = true;
  std::size_t queue_depth = 2;  // batches in flight between stages
};

/// Inclusive partition id range.
struct PartitionFilter {
  std::uint32_t first = 1;
  std::uint32_t last = 0;
  bool contains(std::uint32_t id) const { return id >= first && id <= last; }
};
/// Parses "a:b" (or a single id "a").
PartitionFilter parse_filter(std::string_view text);

/// Finishes or discards an interrupted family commit. Called by every
/// mutating operation before it reads the manifest.
void recover(Storage& storage);
TableManifest load_manifest(Storage& storage);

using PartitionLoader = std::function<PlainPartition(std::size_t index)>;

/// Encrypts partitions 1..n under `table_key` into an empty destination.
TableManifest run_encrypt_table(const std::string& table_name, const Schema& schema,
                                std::size_t n_partitions, const PartitionLoader& load,
                                Storage& dst, const crypto::SymKey& table_key,
                                const PipelineOptions& pipeline = {});

/// Schema plus CSV partitions, one per file, in file-name order.
struct CsvSource {
  Schema schema;
  std::vector<std::filesystem::path> files;
  bool has_header = true;

  PlainPartition load(std::size_t index) const;
};
CsvSource open_csv_source(const std::filesystem::path& dir, bool has_header);

struct FamilyParams {
  std::uint8_t tag_length = 4;
  std::uint8_t branching_bits = 8;
  std::size_t cache_capacity = 512;
  std::optional<crypto::SymKey> family_key;       // sampled when unset
  std::optional<crypto::SymKey> projection_seed;  // fresh per partition when unset
};

struct AddFamilyResult {
  std::string family_id;
  crypto::SymKey family_key;
  planner::CanonicalFamily family;
};

AddFamilyResult run_add_family(Storage& table, const crypto::SymKey& table_key,
                               std::string_view family_sql, const FamilyParams& params = {},
                               const PipelineOptions& pipeline = {});

/// Family definition recorded in the manifest.
planner::CanonicalFamily manifest_family(const TableManifest& manifest,
                                         std::string_view family_id);

backend::ViewKeySet run_view_gen(Storage& table, std::string_view family_id,
                                 const crypto::SymKey& family_key, std::string_view view_sql);
backend::ViewKeySet run_view_gen(Storage& table, std::string_view family_id,
                                 const crypto::SymKey& family_key,
                                 const planner::Bindings& bindings);

struct PartitionOutput {
  std::uint32_t partition_id = 0;
  std::vector<Row> rows;
};

struct RevealTableResult {
  std::vector<PartitionOutput> partitions;  // partition order
  backend::RevealStats stats;
  std::vector<std::string> header;
};

/// Decrypts the view for every partition passing `filter`. When `out_dir` is
/// set, writes `part-%05d.csv` there as partitions complete.
RevealTableResult run_reveal_view(Storage& table, const backend::ViewKeySet& keys,
                                  const std::optional<PartitionFilter>& filter,
                                  const std::optional<std::filesystem::path>& out_dir,
                                  const PipelineOptions& pipeline = {},
                                  const backend::RevealOptions& options = {});

}  // namespace edl::orchestrator
