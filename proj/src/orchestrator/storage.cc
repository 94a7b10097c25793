// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "edl/orchestrator.h"

namespace edl::orchestrator {

namespace fs = std::filesystem;

std::vector<std::string> Storage::list() {
  std::vector<std::string> names = do_list();
  std::sort(names.begin(), names.end());
  return names;
}

std::optional<Bytes> Storage::get(const std::string& name) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    log_.push_back(name);
  }
  return do_get(name);
}

void Storage::before_mutation() {
  std::lock_guard<std::mutex> lock(mu_);
  if (!fail_countdown_) return;
  if (*fail_countdown_ == 0) {
    fail_countdown_.reset();
    throw StorageError("injected storage fault");
  }
  --*fail_countdown_;
}

void Storage::put(const std::string& name, ByteView data) {
  before_mutation();
  do_put(name, data);
}

void Storage::rename(const std::string& from, const std::string& to) {
  before_mutation();
  do_rename(from, to);
}

void Storage::remove(const std::string& name) {
  before_mutation();
  do_remove(name);
}

bool Storage::exists(const std::string& name) {
  const std::vector<std::string> names = do_list();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::string> Storage::access_log() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_;
}

void Storage::clear_access_log() {
  std::lock_guard<std::mutex> lock(mu_);
  log_.clear();
}

void Storage::fail_after_mutations(std::size_t n) {
  std::lock_guard<std::mutex> lock(mu_);
  fail_countdown_ = n;
}

LocalStorage::LocalStorage(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_)) {
    throw StorageError("cannot use " + root_.string() + " as a storage directory");
  }
}

std::vector<std::string> LocalStorage::do_list() {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_)) {
    std::string name = entry.path().filename().string();
    // Hidden names are in-flight puts.
    if (entry.is_regular_file() && !name.starts_with(".")) out.push_back(std::move(name));
  }
  return out;
}

std::optional<Bytes> LocalStorage::do_get(const std::string& name) {
  std::ifstream in(root_ / name, std::ios::binary);
  if (!in) return std::nullopt;
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  Bytes out(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(out.data()), size)) {
    throw StorageError("failed to read " + name);
  }
  return out;
}

void LocalStorage::do_put(const std::string& name, ByteView data) {
  static std::atomic<std::uint64_t> counter{0};
  std::ostringstream tmp_name;
  tmp_name << "." << name << ".partial-" << std::hash<std::thread::id>{}(std::this_thread::get_id())
           << "-" << counter++;
  const fs::path tmp = root_ / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw StorageError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, root_ / name, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StorageError("cannot move " + name + " into place");
  }
}

void LocalStorage::do_rename(const std::string& from, const std::string& to) {
  std::error_code ec;
  fs::rename(root_ / from, root_ / to, ec);
  if (ec) throw StorageError("cannot rename " + from + " to " + to + ": " + ec.message());
}

void LocalStorage::do_remove(const std::string& name) {
  std::error_code ec;
  fs::remove(root_ / name, ec);
  if (ec) throw StorageError("cannot remove " + name + ": " + ec.message());
}

std::vector<std::string> MemoryStorage::do_list() {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, data] : objects_) out.push_back(name);
  return out;
}

std::optional<Bytes> MemoryStorage::do_get(const std::string& name) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = objects_.find(name);
  if (it == objects_.end()) return std::nullopt;
  return it->second;
}

void MemoryStorage::do_put(const std::string& name, ByteView data) {
  Bytes copy(data.begin(), data.end());
  std::lock_guard<std::mutex> lock(mu_);
  objects_[name] = std::move(copy);
}

void MemoryStorage::do_rename(const std::string& from, const std::string& to) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = objects_.find(from);
  if (it == objects_.end()) throw StorageError("no object " + from);
  Bytes data = std::move(it->second);
  objects_.erase(it);
  objects_[to] = std::move(data);
}

void MemoryStorage::do_remove(const std::string& name) {
  std::lock_guard<std::mutex> lock(mu_);
  objects_.erase(name);
}

}  // namespace edl::orchestrator
