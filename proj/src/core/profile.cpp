#include "remi/core/profile.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

namespace remi {

namespace {

constexpr std::array<std::string_view, 34> kProvinces{
    "Anhui",   "Beijing",  "Chongqing", "Fujian",   "Gansu",   "Guangdong",      "Guangxi",
    "Guizhou", "Hainan",   "Hebei",     "Heilongjiang", "Henan", "Hong Kong",   "Hubei",
    "Hunan",   "Inner Mongolia", "Jiangsu", "Jiangxi", "Jilin",  "Liaoning",      "Macau",
    "Ningxia", "Qinghai",  "Shaanxi",   "Shandong", "Shanghai", "Shanxi",        "Sichuan",
    "Taiwan",  "Tianjin",  "Tibet",     "Xinjiang", "Yunnan",  "Zhejiang",
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Value as text whether it came in as a string or a number.
std::optional<std::string> scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return std::to_string(v.get<double>());
    return std::nullopt;
}

std::optional<AgeBand> parse_age_band(const json& v) {
    if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer())
        return AgeBand{v[0].get<int>(), v[1].get<int>()};
    if (v.is_number_integer()) return AgeBand{v.get<int>(), v.get<int>()};
    if (!v.is_string()) return std::nullopt;
    std::string s = v.get<std::string>();
    // Normalize en/em dashes to '-'.
    for (std::string_view dash : {"\xE2\x80\x93", "\xE2\x80\x94"}) {
        for (auto pos = s.find(dash); pos != std::string::npos; pos = s.find(dash))
            s.replace(pos, dash.size(), "-");
    }
    static const std::regex range(R"(^\s*(\d{1,3})\s*(?:-\s*(\d{1,3}))?\s*$)");
    std::smatch m;
    if (!std::regex_match(s, m, range)) return std::nullopt;
    int lo = std::stoi(m[1].str());
    int hi = m[2].matched ? std::stoi(m[2].str()) : lo;
    return AgeBand{lo, hi};
}

enum class DurationParse { ok, negative, invalid };

DurationParse parse_relocation(const json& v, int& months) {
    if (v.is_number_integer()) {
        months = v.get<int>();
        return months < 0 ? DurationParse::negative : DurationParse::ok;
    }
    if (!v.is_string()) return DurationParse::invalid;
    static const std::regex pattern(
        R"(^\s*(-?\d+)\s*(months?|mos?|m|years?|yrs?|y)?\s*$)", std::regex::icase);
    std::smatch m;
    std::string s = v.get<std::string>();
    if (!std::regex_match(s, m, pattern)) return DurationParse::invalid;
    long long n = std::stoll(m[1].str());
    std::string unit = lower(m[2].str());
    bool years = !unit.empty() && unit[0] == 'y';
    if (years) n *= 12;
    if (n < 0) return DurationParse::negative;
    if (n > 12 * 150) return DurationParse::invalid;
    months = static_cast<int>(n);
    return DurationParse::ok;
}

}  // namespace

std::optional<std::string> normalize_province(std::string_view hometown) {
    std::string text = lower(hometown);
    for (std::string_view p : kProvinces) {
        std::string needle = lower(p);
        for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
            bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
            bool right_ok = pos + needle.size() == text.size() || !is_word_char(text[pos + needle.size()]);
            if (left_ok && right_ok) return std::string(p);
        }
    }
    return std::nullopt;
}

ProfileValidation validate_profile(const json& raw) {
    ProfileValidation result;
    if (!raw.is_object()) {
        result.errors.push_back({"", "not_an_object", "profile must be a JSON object"});
        return result;
    }
    UserProfile p;

    // gender
    if (auto it = raw.find("gender"); it != raw.end() && !it->is_null()) {
        auto text = scalar_text(*it);
        std::string g = lower(trim(text.value_or("")));
        if (g == "female" || g == "f" || g == "woman")
            p.gender = Gender::female;
        else if (g == "male" || g == "m" || g == "man")
            p.gender = Gender::male;
        else {
            p.gender = Gender::unspecified;
            if (!g.empty() && g != "unspecified")
                result.warnings.push_back(
                    {"gender", "gender_unrecognized", "unrecognized gender '" + g + "', using unspecified"});
        }
    }

    // age_band
    if (auto it = raw.find("age_band"); it == raw.end() || it->is_null()) {
        result.errors.push_back({"age_band", "age_band_missing", "age band is required"});
    } else if (auto band = parse_age_band(*it); !band || band->lower <= 0 || band->lower > band->upper ||
                                                band->upper > 130) {
        result.errors.push_back({"age_band", "age_band_invalid", "age band must look like '66-70'"});
    } else {
        p.age_band = *band;
        if (band->lower < kSeniorAgeThreshold) {
            p.below_age_threshold = true;
            result.warnings.push_back({"age_band", "below_age_threshold",
                                       "age band starts below " + std::to_string(kSeniorAgeThreshold)});
        }
    }

    // hometown
    if (auto it = raw.find("hometown"); it != raw.end() && it->is_object()) {
        p.hometown.name = trim(it->value("name", ""));
        if (auto prov = it->find("province"); prov != it->end() && prov->is_string() && !prov->get<std::string>().empty())
            p.hometown.province = normalize_province(prov->get<std::string>()).value_or(trim(prov->get<std::string>()));
    } else if (it != raw.end() && it->is_string()) {
        p.hometown.name = trim(it->get<std::string>());
    }
    if (p.hometown.name.empty()) {
        result.errors.push_back({"hometown", "hometown_empty", "hometown must not be empty"});
    } else if (!p.hometown.province) {
        p.hometown.province = normalize_province(p.hometown.name);
    }

    // relocation
    auto reloc = raw.find("relocation");
    if (reloc == raw.end()) reloc = raw.find("relocation_duration");
    if (reloc == raw.end() || reloc->is_null()) {
        p.relocation_months = 0;
    } else {
        switch (parse_relocation(*reloc, p.relocation_months)) {
            case DurationParse::ok: break;
            case DurationParse::negative:
                result.errors.push_back(
                    {"relocation_duration", "relocation_negative", "relocation duration must be >= 0"});
                break;
            case DurationParse::invalid:
                result.errors.push_back({"relocation_duration", "relocation_invalid",
                                         "relocation duration must look like '24 months' or '2 years'"});
                break;
        }
    }

    // locale
    if (auto it = raw.find("locale"); it != raw.end() && !it->is_null()) {
        static const std::regex tag(R"(^[a-z]{2,3}(-[A-Za-z0-9]{2,8})*$)");
        std::string loc = it->is_string() ? trim(it->get<std::string>()) : "";
        if (!std::regex_match(loc, tag))
            result.errors.push_back({"locale", "locale_invalid", "locale must be a language tag like 'en' or 'zh-CN'"});
        else
            p.locale = loc;
    }

    if (auto it = raw.find("display_name"); it != raw.end() && it->is_string())
        p.display_name = trim(it->get<std::string>());

    if (result.errors.empty()) result.profile = std::move(p);
    return result;
}

}  // namespace remi
