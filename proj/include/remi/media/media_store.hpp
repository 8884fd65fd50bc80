#pragma once

#include "remi/media/image.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace remi::media {

// Content-addressed blob store. A blob's ref is the SHA-256 hex digest of its
// bytes; files live at <dir>/<ref[0:2]>/<ref>. Storing identical bytes twice
// yields the same ref and one file. An empty dir keeps blobs in memory.
class MediaStore {
public:
    explicit MediaStore(std::filesystem::path dir = {});

    std::string put(std::string_view bytes);
    std::string put_image(const Image& image) { return put(encode_png(image)); }

    // Bytes whose digest no longer matches the ref are treated as missing.
    std::optional<std::string> get(std::string_view ref) const;
    bool contains(std::string_view ref) const;

    // Throws not_found / validation.
    std::string require(std::string_view ref) const;
    Image load_image(std::string_view ref) const;

private:
    std::filesystem::path path_of(std::string_view ref) const;

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::map<std::string, std::string, std::less<>> memory_;
};

bool is_media_ref(std::string_view ref);

// Sniffed from magic bytes: image/png, audio/wav, audio/mpeg, or
// application/octet-stream.
std::string sniff_mime(std::string_view bytes);

}  // namespace remi::media
