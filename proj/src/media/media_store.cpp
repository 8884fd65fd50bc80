#include "remi/media/media_store.hpp"

#include "remi/core/error.hpp"
#include "remi/core/store.hpp"

#include <algorithm>

namespace remi::media {

bool is_media_ref(std::string_view ref) {
    return ref.size() == 64 &&
           std::all_of(ref.begin(), ref.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

std::string sniff_mime(std::string_view bytes) {
    if (looks_like_png(bytes)) return "image/png";
    if (bytes.size() >= 12 && bytes.substr(0, 4) == "RIFF" && bytes.substr(8, 4) == "WAVE") return "audio/wav";
    if (bytes.substr(0, 3) == "ID3") return "audio/mpeg";
    if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
        (static_cast<unsigned char>(bytes[1]) & 0xE0) == 0xE0)
        return "audio/mpeg";
    return "application/octet-stream";
}

MediaStore::MediaStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::filesystem::path MediaStore::path_of(std::string_view ref) const {
    return dir_ / std::string(ref.substr(0, 2)) / std::string(ref);
}

std::string MediaStore::put(std::string_view bytes) {
    std::string ref = sha256_hex(bytes);
    std::lock_guard lock(mutex_);
    if (dir_.empty()) {
        memory_.emplace(ref, std::string(bytes));
        return ref;
    }
    auto path = path_of(ref);
    if (!std::filesystem::exists(path)) {
        std::filesystem::create_directories(path.parent_path());
        write_file_atomic(path, bytes);
    }
    return ref;
}

std::optional<std::string> MediaStore::get(std::string_view ref) const {
    if (!is_media_ref(ref)) return std::nullopt;
    std::lock_guard lock(mutex_);
    if (dir_.empty()) {
        auto it = memory_.find(ref);
        if (it == memory_.end()) return std::nullopt;
        return it->second;
    }
    auto path = path_of(ref);
    if (!std::filesystem::exists(path)) return std::nullopt;
    std::string bytes = read_file(path);
    if (sha256_hex(bytes) != ref) return std::nullopt;
    return bytes;
}

bool MediaStore::contains(std::string_view ref) const {
    if (!is_media_ref(ref)) return false;
    std::lock_guard lock(mutex_);
    if (dir_.empty()) return memory_.find(ref) != memory_.end();
    return std::filesystem::exists(path_of(ref));
}

std::string MediaStore::require(std::string_view ref) const {
    auto bytes = get(ref);
    if (!bytes) throw_not_found("media " + std::string(ref));
    return *bytes;
}

Image MediaStore::load_image(std::string_view ref) const {
    std::string bytes = require(ref);
    if (!looks_like_png(bytes)) throw Error(ErrorCode::validation, "media " + std::string(ref) + " is not an image");
    return decode_png(bytes);
}

}  // namespace remi::media
