#pragma once

#include "remi/core/clock.hpp"
#include "remi/core/store.hpp"
#include "remi/core/types.hpp"
#include "remi/media/media_store.hpp"

#include <optional>
#include <string>

namespace remi::storybook {

enum class Ordering { position, created_at };

std::string_view to_string(Ordering v);
Ordering parse_ordering(std::string_view text);  // throws validation

struct EntryUpdate {
    std::optional<std::string> caption;
    std::optional<std::string> narrative;
};

struct ExportedDocument {
    std::string filename;  // storybook-<user_id>-<YYYY-MM-DD>.pdf
    std::string bytes;
    std::size_t pages = 0;
};

// Page model: A5 portrait in points, image scaled to the text width and
// capped at 60% of the page height.
struct Layout {
    double page_width = 420;
    double page_height = 595;
    double margin = 42;
    double image_max_height_ratio = 0.6;
    double body_size = 11;
    double caption_size = 14;
};

struct StorybookDeps {
    DocumentStore<LifeStorybook>& books;
    DocumentStore<MemoryMaterial>& materials;
    DocumentStore<UserProfile>& profiles;
    media::MediaStore& media;
    const Clock& clock;
    IdGenerator& ids;
};

class StorybookArchive {
public:
    explicit StorybookArchive(StorybookDeps deps, Layout layout = {});

    // Snapshots the material's selected image and narrative. Saving the same
    // material again appends a second entry.
    StorybookEntry save_entry(const std::string& user_id, const std::string& material_id, const std::string& caption);
    StorybookEntry update_entry(const std::string& user_id, const std::string& entry_id, const EntryUpdate& update);
    void delete_entry(const std::string& user_id, const std::string& entry_id);
    // Moves the entry to new_position, shifting the others.
    LifeStorybook reorder(const std::string& user_id, const std::string& entry_id, std::size_t new_position);

    // Empty book for users that have not saved anything yet.
    LifeStorybook get(const std::string& user_id) const;

    ExportedDocument export_storybook(const std::string& user_id, Ordering ordering = Ordering::position) const;

private:
    UserProfile profile(const std::string& user_id) const;
    LifeStorybook load(const std::string& user_id) const;

    StorybookDeps deps_;
    Layout layout_;
    mutable KeyedMutex locks_;
};

}  // namespace remi::storybook
