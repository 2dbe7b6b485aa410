#include "ac4a/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

namespace ac4a {

namespace {

constexpr std::array<std::string_view, 14> kVoid{"area", "base", "br",   "col",   "embed",  "hr",    "img",
                                                 "input", "link", "meta", "param", "source", "track", "wbr"};
constexpr std::array<std::string_view, 4> kRawText{"script", "style", "textarea", "title"};
// Opening one of these closes an open <p>.
constexpr std::array<std::string_view, 20> kClosesP{"address", "article", "aside", "blockquote", "div",    "dl",  "fieldset",
                                                    "footer",  "form",    "h1",    "h2",         "h3",     "h4",  "h5",
                                                    "h6",      "header",  "nav",   "ol",         "section", "ul"};

template <std::size_t N>
bool one_of(const std::array<std::string_view, N>& set, std::string_view s) {
    return std::find(set.begin(), set.end(), s) != set.end();
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

class TreeBuilder {
public:
    explicit TreeBuilder(std::string_view html) : src_(html) {}

    std::vector<Dom::Element> build() {
        while (pos_ < src_.size()) {
            if (src_[pos_] == '<') {
                if (starts_with("<!--")) {
                    skip_past("-->");
                } else if (starts_with("<!") || starts_with("<?")) {
                    skip_past(">");
                } else if (starts_with("</")) {
                    end_tag();
                } else if (pos_ + 1 < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_ + 1]))) {
                    start_tag();
                } else {
                    text(src_.substr(pos_, 1));
                    ++pos_;
                }
            } else {
                const auto next = src_.find('<', pos_);
                const auto end = next == std::string_view::npos ? src_.size() : next;
                text(decode_entities(src_.substr(pos_, end - pos_)));
                pos_ = end;
            }
        }
        return std::move(elements_);
    }

private:
    bool starts_with(std::string_view prefix) const { return src_.substr(pos_, prefix.size()) == prefix; }

    void skip_past(std::string_view marker) {
        const auto at = src_.find(marker, pos_);
        pos_ = at == std::string_view::npos ? src_.size() : at + marker.size();
    }

    void text(std::string_view t) {
        if (t.empty()) return;
        for (const int id : stack_) elements_[static_cast<std::size_t>(id)].text += t;
    }

    std::string read_name() {
        const auto start = pos_;
        while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>' && src_[pos_] != '/' &&
               src_[pos_] != '=')
            ++pos_;
        return lower(src_.substr(start, pos_ - start));
    }

    void skip_space() {
        while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
    }

    void end_tag() {
        pos_ += 2;
        const auto name = read_name();
        skip_past(">");
        const auto it = std::find_if(stack_.rbegin(), stack_.rend(),
                                     [&](int id) { return elements_[static_cast<std::size_t>(id)].tag == name; });
        if (it != stack_.rend()) stack_.erase(std::next(it).base(), stack_.end());
    }

    void close_open(std::string_view tag) {
        if (!stack_.empty() && elements_[static_cast<std::size_t>(stack_.back())].tag == tag) stack_.pop_back();
    }

    void start_tag() {
        ++pos_;
        Dom::Element el;
        el.tag = read_name();
        bool self_closing = false;
        for (;;) {
            skip_space();
            if (pos_ >= src_.size()) break;
            if (src_[pos_] == '>') {
                ++pos_;
                break;
            }
            if (src_[pos_] == '/') {
                self_closing = true;
                ++pos_;
                continue;
            }
            auto name = read_name();
            if (name.empty()) {
                ++pos_;
                continue;
            }
            skip_space();
            std::string value;
            if (pos_ < src_.size() && src_[pos_] == '=') {
                ++pos_;
                skip_space();
                if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
                    const char q = src_[pos_++];
                    const auto close = src_.find(q, pos_);
                    const auto end = close == std::string_view::npos ? src_.size() : close;
                    value = decode_entities(src_.substr(pos_, end - pos_));
                    pos_ = std::min(src_.size(), end + 1);
                } else {
                    const auto start = pos_;
                    while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>') ++pos_;
                    value = decode_entities(src_.substr(start, pos_ - start));
                }
            }
            el.attributes.emplace_back(std::move(name), std::move(value));
        }

        if (el.tag == "li") close_open("li");
        if (el.tag == "option") close_open("option");
        if (el.tag == "td" || el.tag == "th") {
            close_open("td");
            close_open("th");
        }
        if (el.tag == "tr") close_open("tr");
        if (el.tag == "p" || one_of(kClosesP, el.tag)) close_open("p");

        const int id = static_cast<int>(elements_.size());
        el.parent = stack_.empty() ? -1 : stack_.back();
        auto& siblings = el.parent < 0 ? roots_ : elements_[static_cast<std::size_t>(el.parent)].children;
        el.path = (el.parent < 0 ? std::string() : elements_[static_cast<std::size_t>(el.parent)].path + "/") +
                  std::to_string(siblings.size());
        siblings.push_back(id);
        const auto tag = el.tag;
        elements_.push_back(std::move(el));

        if (one_of(kVoid, tag) || self_closing) return;
        if (one_of(kRawText, tag)) {
            const auto close = find_closing(tag);
            if (tag == "textarea" || tag == "title") {
                stack_.push_back(id);
                text(decode_entities(src_.substr(pos_, close - pos_)));
                stack_.pop_back();
            }
            pos_ = close;
            if (pos_ < src_.size()) skip_past(">");
            return;
        }
        stack_.push_back(id);
    }

    std::size_t find_closing(const std::string& tag) const {
        const auto needle = "</" + tag;
        const auto it = std::search(src_.begin() + static_cast<std::ptrdiff_t>(pos_), src_.end(), needle.begin(),
                                    needle.end(), [](char a, char b) {
                                        return std::tolower(static_cast<unsigned char>(a)) == b;
                                    });
        return static_cast<std::size_t>(it - src_.begin());
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::vector<Dom::Element> elements_;
    std::vector<int> stack_;
    std::vector<int> roots_;
};

}  // namespace

const std::string* Dom::Element::attribute(std::string_view name) const {
    for (const auto& [k, v] : attributes)
        if (k == name) return &v;
    return nullptr;
}

bool Dom::Element::has_class(std::string_view cls) const {
    const auto* classes = attribute("class");
    if (!classes) return false;
    std::size_t pos = 0;
    while (pos < classes->size()) {
        while (pos < classes->size() && is_space((*classes)[pos])) ++pos;
        const auto start = pos;
        while (pos < classes->size() && !is_space((*classes)[pos])) ++pos;
        if (std::string_view(*classes).substr(start, pos - start) == cls && pos > start) return true;
    }
    return false;
}

Dom Dom::parse(std::string_view html) {
    Dom dom;
    dom.elements_ = TreeBuilder(html).build();
    return dom;
}

int Dom::find_by_path(std::string_view path) const {
    for (std::size_t i = 0; i < elements_.size(); ++i)
        if (elements_[i].path == path) return static_cast<int>(i);
    return -1;
}

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '&') {
            out += text[i];
            continue;
        }
        const auto semi = text.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += '&';
            continue;
        }
        const auto name = text.substr(i + 1, semi - i - 1);
        std::uint32_t cp = 0;
        if (name == "amp") cp = '&';
        else if (name == "lt") cp = '<';
        else if (name == "gt") cp = '>';
        else if (name == "quot") cp = '"';
        else if (name == "apos") cp = '\'';
        else if (name == "nbsp") cp = 0xA0;
        else if (name.size() > 1 && name[0] == '#') {
            const bool hex = name[1] == 'x' || name[1] == 'X';
            const auto digits = name.substr(hex ? 2 : 1);
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
            if (ec != std::errc{} || ptr != digits.data() + digits.size()) cp = 0;
        }
        if (cp == 0) {
            out += '&';
            continue;
        }
        append_utf8(out, cp);
        i = semi;
    }
    return out;
}

}  // namespace ac4a
