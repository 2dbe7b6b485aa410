#include "ac4a/selector.hpp"

#include <algorithm>
#include <cctype>

#include "ac4a/errors.hpp"

namespace ac4a {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

class SelectorParser {
public:
    explicit SelectorParser(std::string_view text) : src_(text) {}

    std::vector<ExtendedSelector::Complex> parse() {
        std::vector<ExtendedSelector::Complex> out;
        for (;;) {
            out.push_back(complex());
            skip_space();
            if (at_end()) break;
            if (src_[pos_] != ',') fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
            ++pos_;
        }
        return out;
    }

private:
    using Compound = ExtendedSelector::Compound;
    using Combinator = ExtendedSelector::Combinator;

    [[noreturn]] void fail(const std::string& message) const {
        throw SelectorSyntaxError("selector '" + std::string(src_) + "': " + message, pos_);
    }

    bool at_end() const { return pos_ >= src_.size(); }

    void skip_space() {
        while (!at_end() && is_space(src_[pos_])) ++pos_;
    }

    std::string ident() {
        const auto start = pos_;
        while (!at_end() && (is_ident_char(src_[pos_]) || src_[pos_] == '\\')) {
            if (src_[pos_] == '\\') ++pos_;
            ++pos_;
        }
        if (pos_ == start) fail("expected an identifier");
        std::string out;
        for (auto i = start; i < pos_ && i < src_.size(); ++i) {
            if (src_[i] == '\\' && i + 1 < pos_) ++i;
            out += src_[i];
        }
        return out;
    }

    std::string quoted_or_ident() {
        if (!at_end() && (src_[pos_] == '\'' || src_[pos_] == '"')) {
            const char q = src_[pos_++];
            std::string out;
            while (!at_end() && src_[pos_] != q) {
                if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) ++pos_;
                out += src_[pos_++];
            }
            if (at_end()) fail("unterminated string");
            ++pos_;
            return out;
        }
        return ident();
    }

    ExtendedSelector::Complex complex() {
        ExtendedSelector::Complex c;
        skip_space();
        c.compounds.push_back(compound());
        for (;;) {
            const auto before = pos_;
            skip_space();
            if (at_end() || src_[pos_] == ',') return c;
            if (src_[pos_] == '>') {
                ++pos_;
                skip_space();
                c.combinators.push_back(Combinator::Child);
            } else if (pos_ > before) {
                c.combinators.push_back(Combinator::Descendant);
            } else {
                fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
            }
            c.compounds.push_back(compound());
        }
    }

    Compound compound() {
        Compound c;
        bool any = false;
        if (!at_end() && src_[pos_] == '*') {
            c.tag = "*";
            ++pos_;
            any = true;
        } else if (!at_end() && is_ident_char(src_[pos_])) {
            c.tag = lower(ident());
            any = true;
        }
        while (!at_end()) {
            const char ch = src_[pos_];
            if (ch == '#') {
                ++pos_;
                c.ids.push_back(ident());
            } else if (ch == '.') {
                ++pos_;
                c.classes.push_back(ident());
            } else if (ch == '[') {
                ++pos_;
                c.attrs.push_back(attribute());
            } else if (ch == ':') {
                ++pos_;
                const auto name = lower(ident());
                if (name != "contains") fail("unsupported pseudo-class ':" + name + "'");
                if (at_end() || src_[pos_] != '(') fail("expected '(' after :contains");
                ++pos_;
                skip_space();
                c.contains.push_back(quoted_or_ident());
                skip_space();
                if (at_end() || src_[pos_] != ')') fail("expected ')' to close :contains");
                ++pos_;
            } else {
                break;
            }
            any = true;
        }
        if (!any) fail(at_end() ? "expected a selector" : "unexpected character '" + std::string(1, src_[pos_]) + "'");
        return c;
    }

    ExtendedSelector::AttrTest attribute() {
        using Op = ExtendedSelector::AttrOp;
        ExtendedSelector::AttrTest t;
        skip_space();
        t.name = lower(ident());
        skip_space();
        if (at_end()) fail("unterminated attribute selector");
        if (src_[pos_] == ']') {
            ++pos_;
            return t;
        }
        const char ch = src_[pos_];
        if (ch == '=') {
            t.op = Op::Equals;
            ++pos_;
        } else {
            switch (ch) {
                case '~': t.op = Op::Includes; break;
                case '|': t.op = Op::DashMatch; break;
                case '^': t.op = Op::Prefix; break;
                case '$': t.op = Op::Suffix; break;
                case '*': t.op = Op::Substring; break;
                default: fail("unknown attribute operator");
            }
            ++pos_;
            if (at_end() || src_[pos_] != '=') fail("expected '=' in attribute selector");
            ++pos_;
        }
        skip_space();
        t.value = quoted_or_ident();
        skip_space();
        if (at_end() || src_[pos_] != ']') fail("expected ']'");
        ++pos_;
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

ExtendedSelector ExtendedSelector::parse(std::string_view text) {
    ExtendedSelector sel;
    sel.text_ = std::string(text);
    sel.alternatives_ = SelectorParser(text).parse();
    return sel;
}

bool ExtendedSelector::matches_compound(const Compound& c, const Dom::Element& el) {
    if (!c.tag.empty() && c.tag != "*" && c.tag != el.tag) return false;
    for (const auto& id : c.ids) {
        const auto* v = el.attribute("id");
        if (!v || *v != id) return false;
    }
    for (const auto& cls : c.classes)
        if (!el.has_class(cls)) return false;
    for (const auto& t : c.attrs) {
        const auto* v = el.attribute(t.name);
        if (!v) return false;
        const std::string_view s = *v;
        switch (t.op) {
            case AttrOp::Exists: break;
            case AttrOp::Equals:
                if (s != t.value) return false;
                break;
            case AttrOp::Includes: {
                bool found = false;
                std::size_t pos = 0;
                while (pos <= s.size() && !found) {
                    const auto end = std::min(s.find(' ', pos), s.size());
                    found = !t.value.empty() && s.substr(pos, end - pos) == t.value;
                    pos = end + 1;
                }
                if (!found) return false;
                break;
            }
            case AttrOp::DashMatch:
                if (s != t.value && s.substr(0, t.value.size() + 1) != t.value + "-") return false;
                break;
            case AttrOp::Prefix:
                if (t.value.empty() || s.substr(0, t.value.size()) != t.value) return false;
                break;
            case AttrOp::Suffix:
                if (t.value.empty() || s.size() < t.value.size() || s.substr(s.size() - t.value.size()) != t.value)
                    return false;
                break;
            case AttrOp::Substring:
                if (t.value.empty() || s.find(t.value) == std::string_view::npos) return false;
                break;
        }
    }
    for (const auto& needle : c.contains)
        if (el.text.find(needle) == std::string::npos) return false;
    return true;
}

bool ExtendedSelector::matches_from(const Complex& complex, std::size_t index, const Dom& dom, int element) {
    if (!matches_compound(complex.compounds[index], dom.element(element))) return false;
    if (index == 0) return true;
    const auto combinator = complex.combinators[index - 1];
    int ancestor = dom.element(element).parent;
    if (combinator == Combinator::Child) return ancestor >= 0 && matches_from(complex, index - 1, dom, ancestor);
    for (; ancestor >= 0; ancestor = dom.element(ancestor).parent)
        if (matches_from(complex, index - 1, dom, ancestor)) return true;
    return false;
}

bool ExtendedSelector::matches(const Dom& dom, int element) const {
    return std::any_of(alternatives_.begin(), alternatives_.end(), [&](const Complex& c) {
        return matches_from(c, c.compounds.size() - 1, dom, element);
    });
}

std::vector<int> ExtendedSelector::match_all(const Dom& dom) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(dom.size()); ++i)
        if (matches(dom, i)) out.push_back(i);
    return out;
}

std::vector<int> match_selector(std::string_view selector, const Dom& dom) {
    return ExtendedSelector::parse(selector).match_all(dom);
}

}  // namespace ac4a
