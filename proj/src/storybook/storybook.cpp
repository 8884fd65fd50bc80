#include "remi/storybook/storybook.hpp"

#include "remi/storybook/pdf.hpp"

#include <algorithm>
#include <cctype>

namespace remi::storybook {

namespace {

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); });
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto nl = s.find('\n', start);
        out.emplace_back(s.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return out;
}

void compact(LifeStorybook& book) {
    for (std::size_t i = 0; i < book.entries.size(); ++i) book.entries[i].position = i;
}

std::vector<StorybookEntry>::iterator find_entry(LifeStorybook& book, const std::string& entry_id) {
    auto it = std::find_if(book.entries.begin(), book.entries.end(),
                           [&](const StorybookEntry& e) { return e.entry_id == entry_id; });
    if (it == book.entries.end()) throw_not_found("storybook entry " + entry_id);
    return it;
}

// Lays out pages top-down; `y` is the baseline cursor measured from the
// bottom edge as PDF expects.
class Composer {
public:
    Composer(pdf::Document& doc, const Layout& layout) : doc_(doc), layout_(layout) {}

    double text_width() const { return layout_.page_width - 2 * layout_.margin; }

    void new_page() {
        page_ = &doc_.add_page();
        ++number_;
        y_ = layout_.page_height - layout_.margin;
        if (number_ > 1) {
            auto label = std::to_string(number_);
            double w = pdf::text_width(label, 9, pdf::Font::regular);
            page_->text((layout_.page_width - w) / 2, layout_.margin / 2, 9, pdf::Font::regular, label);
        }
    }

    bool fits(double height) const { return y_ - height >= layout_.margin; }

    void centered(double y, double size, pdf::Font font, const std::string& utf8) {
        auto line = pdf::to_winansi(utf8);
        double w = pdf::text_width(line, size, font);
        page_->text((layout_.page_width - w) / 2, y, size, font, line);
    }

    // Wrapped block; continues onto new pages. Text drawn after the first
    // page is marked as an artifact so extraction sees the block once.
    void block(const std::string& tag, const std::string& utf8, double size, pdf::Font font) {
        const double leading = size * 1.35;
        std::vector<std::string> lines;
        for (const auto& para : split_lines(utf8)) {
            auto wrapped = pdf::wrap(pdf::to_winansi(para), text_width(), size, font);
            if (wrapped.empty()) wrapped.emplace_back();
            lines.insert(lines.end(), wrapped.begin(), wrapped.end());
        }
        page_->begin_span(tag, utf8);
        for (const auto& line : lines) {
            if (!fits(leading)) {
                page_->end_span();
                new_page();
                page_->begin_span("Artifact", "");
            }
            y_ -= leading;
            if (!line.empty()) page_->text(layout_.margin, y_, size, font, line);
        }
        page_->end_span();
    }

    void image(const std::string& name, int px_w, int px_h) {
        double w = text_width();
        double h = w * px_h / std::max(px_w, 1);
        double cap = layout_.page_height * layout_.image_max_height_ratio;
        if (h > cap) {
            w *= cap / h;
            h = cap;
        }
        if (!fits(h)) new_page();
        y_ -= h;
        page_->image(name, (layout_.page_width - w) / 2, y_, w, h);
    }

    void gap(double points) { y_ -= points; }

    void line(double size, pdf::Font font, const std::string& utf8) {
        const double leading = size * 1.35;
        if (!fits(leading)) new_page();
        y_ -= leading;
        page_->text(layout_.margin, y_, size, font, pdf::to_winansi(utf8));
    }

private:
    pdf::Document& doc_;
    const Layout& layout_;
    pdf::Page* page_ = nullptr;
    int number_ = 0;
    double y_ = 0;
};

}  // namespace

std::string_view to_string(Ordering v) { return v == Ordering::position ? "position" : "created_at"; }

Ordering parse_ordering(std::string_view text) {
    if (text == "position") return Ordering::position;
    if (text == "created_at") return Ordering::created_at;
    throw Error(ErrorCode::validation, "unknown ordering: " + std::string(text),
                {{"ordering", "invalid", "expected position or created_at"}});
}

StorybookArchive::StorybookArchive(StorybookDeps deps, Layout layout) : deps_(deps), layout_(layout) {}

UserProfile StorybookArchive::profile(const std::string& user_id) const {
    auto p = deps_.profiles.get(user_id);
    if (!p) throw_not_found("user " + user_id);
    return *p;
}

LifeStorybook StorybookArchive::load(const std::string& user_id) const {
    if (auto book = deps_.books.get(user_id)) return *book;
    LifeStorybook book;
    book.user_id = user_id;
    return book;
}

LifeStorybook StorybookArchive::get(const std::string& user_id) const {
    profile(user_id);
    auto lock = locks_.lock(user_id);
    return load(user_id);
}

StorybookEntry StorybookArchive::save_entry(const std::string& user_id, const std::string& material_id,
                                            const std::string& caption) {
    profile(user_id);
    auto material = deps_.materials.get(material_id);
    if (!material || material->user_id != user_id) throw_not_found("material " + material_id);
    if (!material->selected_image || *material->selected_image >= material->image_candidates.size())
        throw Error(ErrorCode::precondition, "select an image before saving this memory");
    if (blank(material->narrative.body))
        throw Error(ErrorCode::precondition, "the memory has no story text yet");

    auto lock = locks_.lock(user_id);
    auto book = load(user_id);
    StorybookEntry entry;
    entry.entry_id = deps_.ids.next("entry");
    entry.material_id = material_id;
    entry.image_ref = material->image_candidates[*material->selected_image].image_ref;
    entry.narrative = material->narrative.body;
    entry.caption = caption;
    entry.created_at = deps_.clock.now();
    entry.position = book.entries.size();
    book.entries.push_back(entry);
    deps_.books.put(user_id, book);
    return entry;
}

StorybookEntry StorybookArchive::update_entry(const std::string& user_id, const std::string& entry_id,
                                              const EntryUpdate& update) {
    if (update.narrative && blank(*update.narrative))
        throw Error(ErrorCode::validation, "narrative must not be empty",
                    {{"narrative", "required", "must not be empty"}});
    auto lock = locks_.lock(user_id);
    auto book = load(user_id);
    auto it = find_entry(book, entry_id);
    if (update.caption) it->caption = *update.caption;
    if (update.narrative) it->narrative = *update.narrative;
    deps_.books.put(user_id, book);
    return *it;
}

void StorybookArchive::delete_entry(const std::string& user_id, const std::string& entry_id) {
    auto lock = locks_.lock(user_id);
    auto book = load(user_id);
    book.entries.erase(find_entry(book, entry_id));
    compact(book);
    deps_.books.put(user_id, book);
}

LifeStorybook StorybookArchive::reorder(const std::string& user_id, const std::string& entry_id,
                                        std::size_t new_position) {
    auto lock = locks_.lock(user_id);
    auto book = load(user_id);
    auto it = find_entry(book, entry_id);
    if (new_position >= book.entries.size())
        throw Error(ErrorCode::validation, "position out of range",
                    {{"position", "out_of_range",
                      "must be below " + std::to_string(book.entries.size())}});
    auto entry = *it;
    book.entries.erase(it);
    book.entries.insert(book.entries.begin() + static_cast<std::ptrdiff_t>(new_position), entry);
    compact(book);
    deps_.books.put(user_id, book);
    return book;
}

ExportedDocument StorybookArchive::export_storybook(const std::string& user_id, Ordering ordering) const {
    auto owner = profile(user_id);
    LifeStorybook book;
    {
        auto lock = locks_.lock(user_id);
        book = load(user_id);
    }
    if (book.entries.empty())
        throw Error(ErrorCode::precondition, "Your storybook is empty. Save a memory before exporting.");

    auto entries = book.entries;
    if (ordering == Ordering::created_at)
        std::stable_sort(entries.begin(), entries.end(),
                         [](const StorybookEntry& a, const StorybookEntry& b) { return a.created_at < b.created_at; });

    auto today = format_date(deps_.clock.now());
    std::string compact_date;
    std::copy_if(today.begin(), today.end(), std::back_inserter(compact_date), [](char c) { return c != '-'; });

    pdf::Document doc(layout_.page_width, layout_.page_height);
    doc.set_info("Life Storybook", owner.display_name, compact_date);
    Composer out(doc, layout_);

    out.new_page();
    const double mid = layout_.page_height * 0.62;
    out.centered(mid, 24, pdf::Font::bold, "Life Storybook");
    if (!owner.display_name.empty()) out.centered(mid - 34, 16, pdf::Font::regular, owner.display_name);
    out.centered(mid - 62, 11, pdf::Font::regular, "Exported " + today);
    out.centered(mid - 80, 11, pdf::Font::regular,
                 std::to_string(entries.size()) + (entries.size() == 1 ? " memory" : " memories"));

    for (const auto& entry : entries) {
        out.new_page();
        if (!blank(entry.caption)) {
            out.block("Caption", entry.caption, layout_.caption_size, pdf::Font::bold);
            out.gap(8);
        }
        auto image = deps_.media.load_image(entry.image_ref);
        out.image(doc.add_image(image, entry.image_ref), image.width(), image.height());
        out.gap(10);
        out.block("Narrative", entry.narrative, layout_.body_size, pdf::Font::regular);
        out.gap(6);
        out.line(9, pdf::Font::regular, "Created " + format_date(entry.created_at));
    }

    ExportedDocument result;
    result.filename = "storybook-" + user_id + "-" + today + ".pdf";
    result.pages = doc.page_count();
    result.bytes = doc.serialize();
    return result;
}

}  // namespace remi::storybook
