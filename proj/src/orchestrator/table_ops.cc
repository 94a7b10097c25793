// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <charconv>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <thread>

#include "edl/orchestrator.h"

namespace edl::orchestrator {
namespace fs = std::filesystem;
namespace {

/// Bounded hand-off queue between two pipeline stages.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

  bool push(T item) {
    std::unique_lock<std::mutex> lock(mu_);
    not_full_.wait(lock, [&] { return cancelled_ || items_.size() < capacity_; });
    if (cancelled_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock<std::mutex> lock(mu_);
    not_empty_.wait(lock, [&] { return cancelled_ || closed_ || !items_.empty(); });
    if (cancelled_ || items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  void cancel() {
    std::lock_guard<std::mutex> lock(mu_);
    cancelled_ = true;
    items_.clear();
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  std::size_t capacity_;
  bool closed_ = false;
  bool cancelled_ = false;
};

template <typename In, typename Out>
struct Batch {
  std::vector<std::uint32_t> ids;
  std::vector<In> inputs;
  std::vector<std::optional<Out>> outputs;
};

template <typename In, typename Out>
void compute_batch(Batch<In, Out>& batch, std::size_t workers,
                   const std::function<Out(std::uint32_t, In&&)>& compute) {
  const std::size_t n = batch.ids.size();
  batch.outputs.resize(n);
  const std::size_t threads = std::min(workers, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      batch.outputs[i].emplace(compute(batch.ids[i], std::move(batch.inputs[i])));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        batch.outputs[i].emplace(compute(batch.ids[i], std::move(batch.inputs[i])));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Fetch -> compute -> store over batches of partitions. Stores happen in
/// partition order on the calling thread.
template <typename In, typename Out>
void run_stages(const std::vector<std::uint32_t>& ids, const PipelineOptions& opt,
                const std::function<In(std::uint32_t)>& fetch,
                const std::function<Out(std::uint32_t, In&&)>& compute,
                const std::function<void(std::uint32_t, Out&&)>& store) {
  const std::size_t workers = std::max<std::size_t>(1, opt.workers);
  const std::size_t batch_size = opt.batch_size == 0 ? workers : opt.batch_size;
  std::vector<std::vector<std::uint32_t>> plan;
  for (std::size_t i = 0; i < ids.size(); i += batch_size) {
    plan.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(i),
                      ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), i + batch_size)));
  }
  using B = Batch<In, Out>;
  auto fetch_batch = [&](const std::vector<std::uint32_t>& part_ids) {
    B b;
    b.ids = part_ids;
    for (std::uint32_t id : part_ids) b.inputs.push_back(fetch(id));
    return b;
  };
  auto store_batch = [&](B& b) {
    for (std::size_t i = 0; i < b.ids.size(); ++i) store(b.ids[i], std::move(*b.outputs[i]));
  };

  if (!opt.pipelined) {
    for (const auto& part_ids : plan) {
      B b = fetch_batch(part_ids);
      compute_batch(b, workers, compute);
      store_batch(b);
    }
    return;
  }

  BoundedQueue<B> fetched(opt.queue_depth);
  BoundedQueue<B> computed(opt.queue_depth);
  std::mutex error_mu;
  std::exception_ptr error;
  auto fail = [&] {
    {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!error) error = std::current_exception();
    }
    fetched.cancel();
    computed.cancel();
  };
  std::thread fetcher([&] {
    try {
      for (const auto& part_ids : plan) {
        if (!fetched.push(fetch_batch(part_ids))) break;
      }
      fetched.close();
    } catch (...) {
      fail();
    }
  });
  std::thread computer([&] {
    try {
      while (auto b = fetched.pop()) {
        compute_batch(*b, workers, compute);
        if (!computed.push(std::move(*b))) break;
      }
      computed.close();
    } catch (...) {
      fail();
    }
  });
  try {
    while (auto b = computed.pop()) store_batch(*b);
  } catch (...) {
    fail();
  }
  fetcher.join();
  computer.join();
  if (error) std::rethrow_exception(error);
}

Bytes fetch_object(Storage& storage, const std::string& name) {
  std::optional<Bytes> data = storage.get(name);
  if (!data) throw StorageError("missing object " + name);
  return std::move(*data);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::vector<std::uint32_t> census_ids(const TableManifest& m) {
  std::vector<std::uint32_t> ids;
  for (const PartitionInfo& p : m.partitions) ids.push_back(p.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

std::string partition_object_name(std::uint32_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "part-%05u.mep", id);
  return buf;
}

PartitionFilter parse_filter(std::string_view text) {
  auto num = [&](std::string_view s) {
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
      throw std::invalid_argument("partition filter must be FIRST:LAST with ids >= 1");
    }
    return v;
  };
  const std::size_t colon = text.find(':');
  PartitionFilter f;
  if (colon == std::string_view::npos) {
    f.first = f.last = num(text);
  } else {
    f.first = num(text.substr(0, colon));
    f.last = num(text.substr(colon + 1));
  }
  if (f.first > f.last) throw std::invalid_argument("partition filter range is empty");
  return f;
}

void recover(Storage& storage) {
  const std::vector<std::string> names = storage.list();
  const bool pending =
      std::find(names.begin(), names.end(), kPendingManifestName) != names.end();
  for (const std::string& name : names) {
    if (!ends_with(name, kStagingSuffix)) continue;
    if (pending) {
      storage.rename(name, name.substr(0, name.size() - std::string_view(kStagingSuffix).size()));
    } else {
      storage.remove(name);
    }
  }
  if (pending) storage.rename(kPendingManifestName, kManifestName);
}

TableManifest load_manifest(Storage& storage) {
  std::optional<Bytes> data = storage.get(kManifestName);
  if (!data) throw StorageError("no table manifest (manifest.json) in storage");
  return TableManifest::from_json(
      std::string_view(reinterpret_cast<const char*>(data->data()), data->size()));
}

TableManifest run_encrypt_table(const std::string& table_name, const Schema& schema,
                                std::size_t n_partitions, const PartitionLoader& load,
                                Storage& dst, const crypto::SymKey& table_key,
                                const PipelineOptions& pipeline) {
  for (const std::string& name : dst.list()) {
    if (name.starts_with("manifest.json") || name.starts_with("part-")) {
      throw StorageError("destination already holds a table; refusing to overwrite");
    }
  }
  TableManifest manifest;
  manifest.table_name = table_name;
  manifest.schema = schema;
  std::vector<std::uint32_t> ids;
  for (std::size_t i = 0; i < n_partitions; ++i) ids.push_back(static_cast<std::uint32_t>(i + 1));

  struct Encrypted {
    Bytes file;
    std::uint32_t rows;
  };
  run_stages<PlainPartition, Encrypted>(
      ids, pipeline,
      [&](std::uint32_t id) {
        PlainPartition p = load(id - 1);
        p.partition_id = id;
        return p;
      },
      [&](std::uint32_t, PlainPartition&& plain) {
        EncryptedPartition enc = backend::encrypt_partition(plain, schema, table_key);
        return Encrypted{serialize_partition(enc, schema), enc.row_count};
      },
      [&](std::uint32_t id, Encrypted&& e) {
        dst.put(partition_object_name(id), e.file);
        manifest.partitions.push_back({id, e.rows});
      });
  const std::string json = manifest.to_json();
  dst.put(kManifestName, as_bytes(json));
  return manifest;
}

PlainPartition CsvSource::load(std::size_t index) const {
  return read_csv_partition(read_text_file(files.at(index)), schema,
                            static_cast<std::uint32_t>(index + 1), has_header);
}

CsvSource open_csv_source(const fs::path& dir, bool has_header) {
  CsvSource src;
  src.has_header = has_header;
  src.schema = schema_from_json(read_text_file(dir / "schema.json"));
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      src.files.push_back(entry.path());
    }
  }
  std::sort(src.files.begin(), src.files.end());
  if (src.files.empty()) throw StorageError("no .csv partitions in " + dir.string());
  return src;
}

planner::CanonicalFamily manifest_family(const TableManifest& manifest,
                                         std::string_view family_id) {
  const FamilyRecord* rec = manifest.find_family(family_id);
  if (rec == nullptr) throw std::invalid_argument("unknown family id " + std::string(family_id));
  planner::CanonicalFamily family = planner::CanonicalFamily::deserialize(from_hex(rec->canonical_hex));
  if (family.family_id() != rec->family_id) {
    throw FormatError("manifest family record does not hash to its id " + rec->family_id);
  }
  return family;
}

AddFamilyResult run_add_family(Storage& table, const crypto::SymKey& table_key,
                               std::string_view family_sql, const FamilyParams& params,
                               const PipelineOptions& pipeline) {
  if (params.tag_length < 1 || params.tag_length > 16) {
    throw std::invalid_argument("tag length must be 1..16 bytes");
  }
  recover(table);
  TableManifest manifest = load_manifest(table);
  planner::PlannerParams pp;
  pp.branching_bits = params.branching_bits;
  AddFamilyResult result{"", params.family_key ? *params.family_key : crypto::SymKey::random(),
                         planner::plan_family(family_sql, manifest.schema, pp)};
  result.family_id = result.family.family_id();
  if (manifest.find_family(result.family_id) != nullptr) {
    throw std::invalid_argument("family " + result.family_id + " is already instantiated");
  }

  backend::AddFamilyOptions opts;
  opts.tag_length = params.tag_length;
  opts.cache_capacity = params.cache_capacity;
  opts.projection_seed = params.projection_seed;
  const Schema& schema = manifest.schema;
  std::vector<std::string> staged;
  try {
    run_stages<Bytes, Bytes>(
        census_ids(manifest), pipeline,
        [&](std::uint32_t id) { return fetch_object(table, partition_object_name(id)); },
        [&](std::uint32_t id, Bytes&& file) {
          EncryptedPartition enc = parse_partition(file, &schema);
          if (enc.partition_id != id) throw FormatError("partition file carries the wrong id");
          enc.add_family(backend::add_family_partition(enc, schema, table_key, result.family,
                                                       result.family_key, opts));
          return serialize_partition(enc, schema);
        },
        [&](std::uint32_t id, Bytes&& file) {
          const std::string name = partition_object_name(id) + kStagingSuffix;
          table.put(name, file);
          staged.push_back(name);
        });
  } catch (...) {
    for (const std::string& name : staged) {
      try {
        table.remove(name);
      } catch (const StorageError&) {
        // Recovery discards any leftovers.
      }
    }
    throw;
  }

  FamilyRecord rec;
  rec.family_id = result.family_id;
  rec.canonical_hex = to_hex(result.family.serialize());
  rec.sql = result.family.sql;
  rec.tag_length_bytes = params.tag_length;
  rec.branching_factor_bits = params.branching_bits;
  manifest.families.push_back(rec);
  const std::string json = manifest.to_json();
  // Commit point: once the pending manifest exists, recovery rolls forward.
  table.put(kPendingManifestName, as_bytes(json));
  for (const std::string& name : staged) {
    table.rename(name, name.substr(0, name.size() - std::string_view(kStagingSuffix).size()));
  }
  table.rename(kPendingManifestName, kManifestName);
  return result;
}

backend::ViewKeySet run_view_gen(Storage& table, std::string_view family_id,
                                 const crypto::SymKey& family_key, std::string_view view_sql) {
  const TableManifest manifest = load_manifest(table);
  const planner::CanonicalFamily family = manifest_family(manifest, family_id);
  const planner::CanonicalView view = planner::plan_view(view_sql, family, manifest.schema);
  return backend::view_gen(view, family_key, manifest.find_family(family_id)->tag_length_bytes);
}

backend::ViewKeySet run_view_gen(Storage& table, std::string_view family_id,
                                 const crypto::SymKey& family_key,
                                 const planner::Bindings& bindings) {
  const TableManifest manifest = load_manifest(table);
  const planner::CanonicalFamily family = manifest_family(manifest, family_id);
  const planner::CanonicalView view =
      planner::plan_view_bindings(family, manifest.schema, bindings);
  return backend::view_gen(view, family_key, manifest.find_family(family_id)->tag_length_bytes);
}

RevealTableResult run_reveal_view(Storage& table, const backend::ViewKeySet& keys,
                                  const std::optional<PartitionFilter>& filter,
                                  const std::optional<fs::path>& out_dir,
                                  const PipelineOptions& pipeline,
                                  const backend::RevealOptions& options) {
  const TableManifest manifest = load_manifest(table);
  const planner::CanonicalFamily family = manifest_family(manifest, keys.family_id);
  const FamilyRecord* rec = manifest.find_family(keys.family_id);
  if (rec->tag_length_bytes != keys.tag_length) {
    throw std::invalid_argument("view keys use " + std::to_string(keys.tag_length) +
                                "-byte tags but the family uses " +
                                std::to_string(rec->tag_length_bytes));
  }
  const Schema& schema = manifest.schema;
  RevealTableResult result;
  for (std::size_t c : family.projection) result.header.push_back(schema[c].name);

  std::vector<std::uint32_t> ids;
  for (std::uint32_t id : census_ids(manifest)) {
    if (!filter || filter->contains(id)) ids.push_back(id);
  }
  if (out_dir) fs::create_directories(*out_dir);

  struct Revealed {
    std::vector<Row> rows;
    backend::RevealStats stats;
  };
  run_stages<Bytes, Revealed>(
      ids, pipeline,
      [&](std::uint32_t id) { return fetch_object(table, partition_object_name(id)); },
      [&](std::uint32_t id, Bytes&& file) {
        const EncryptedPartition enc = parse_partition(file, &schema);
        if (enc.partition_id != id) throw FormatError("partition file carries the wrong id");
        Revealed out;
        out.rows = backend::reveal_view_partition(enc, schema, family, keys, options, &out.stats).rows;
        return out;
      },
      [&](std::uint32_t id, Revealed&& r) {
        if (out_dir) {
          char name[32];
          std::snprintf(name, sizeof(name), "part-%05u.csv", id);
          const std::string csv = write_csv(r.rows, result.header);
          std::ofstream out(*out_dir / name, std::ios::binary | std::ios::trunc);
          out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
          if (!out) throw StorageError("cannot write " + (*out_dir / name).string());
        }
        result.stats.block_ops += r.stats.block_ops;
        result.stats.decrypt_attempts += r.stats.decrypt_attempts;
        result.stats.false_positives += r.stats.false_positives;
        result.stats.rows_emitted += r.stats.rows_emitted;
        result.partitions.push_back({id, std::move(r.rows)});
      });
  return result;
}

}  // namespace edl::orchestrator
