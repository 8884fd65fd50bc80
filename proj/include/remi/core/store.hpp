#pragma once

#include "remi/core/error.hpp"
#include "remi/core/json.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace remi {

// tmp + rename so readers never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// Ids double as file names, so only [A-Za-z0-9_.:-] is accepted.
bool is_safe_id(std::string_view id);

// One JSON document per id under a directory, cached in memory and written
// through on every put. An empty directory path keeps the store in memory
// only (used by tests that do not exercise persistence).
template <typename T>
class DocumentStore {
public:
    explicit DocumentStore(std::filesystem::path dir = {}) : dir_(std::move(dir)) {
        if (dir_.empty()) return;
        std::filesystem::create_directories(dir_);
        for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
            if (entry.path().extension() != ".json") continue;
            json j = json::parse(read_file(entry.path()));
            cache_.emplace(entry.path().stem().string(), j.get<T>());
        }
    }

    std::optional<T> get(const std::string& id) const {
        std::shared_lock lock(mutex_);
        auto it = cache_.find(id);
        if (it == cache_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(const std::string& id) const {
        std::shared_lock lock(mutex_);
        return cache_.count(id) != 0;
    }

    void put(const std::string& id, const T& value) {
        if (!is_safe_id(id)) throw Error(ErrorCode::validation, "invalid id: " + id);
        std::unique_lock lock(mutex_);
        if (!dir_.empty()) write_file_atomic(dir_ / (id + ".json"), json(value).dump(2));
        cache_[id] = value;
    }

    bool remove(const std::string& id) {
        std::unique_lock lock(mutex_);
        if (cache_.erase(id) == 0) return false;
        if (!dir_.empty()) std::filesystem::remove(dir_ / (id + ".json"));
        return true;
    }

    std::vector<T> all() const {
        std::shared_lock lock(mutex_);
        std::vector<T> out;
        out.reserve(cache_.size());
        for (const auto& [id, v] : cache_) out.push_back(v);
        return out;
    }

private:
    std::filesystem::path dir_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, T> cache_;
};

// Hands out one mutex per key, for read-modify-write sequences that must
// serialize per session / per user without blocking unrelated keys.
class KeyedMutex {
public:
    std::unique_lock<std::mutex> lock(const std::string& key) {
        std::shared_ptr<std::mutex> m;
        {
            std::lock_guard guard(map_mutex_);
            auto& slot = mutexes_[key];
            if (!slot) slot = std::make_shared<std::mutex>();
            m = slot;
        }
        // Entries are never erased, so the mutex outlives the lock.
        return std::unique_lock<std::mutex>(*m);
    }

private:
    std::mutex map_mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> mutexes_;
};

}  // namespace remi
