#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ac4a/html.hpp"

namespace ac4a {

// CSS selector with the `:contains('text')` extension. Supports type, `*`,
// `#id`, `.class`, attribute tests (`[a]`, `=`, `~=`, `|=`, `^=`, `$=`,
// `*=`), descendant and child (`>`) combinators, and `,` lists.
// `:contains` is a case-sensitive substring test on the element's
// concatenated descendant text.
class ExtendedSelector {
public:
    static ExtendedSelector parse(std::string_view text);

    const std::string& text() const { return text_; }

    bool matches(const Dom& dom, int element) const;
    // Matching element ids in document order.
    std::vector<int> match_all(const Dom& dom) const;

    bool operator==(const ExtendedSelector& other) const { return text_ == other.text_; }

private:
    enum class AttrOp { Exists, Equals, Includes, DashMatch, Prefix, Suffix, Substring };

    struct AttrTest {
        std::string name;
        AttrOp op = AttrOp::Exists;
        std::string value;
    };

    struct Compound {
        std::string tag;  // empty or "*" matches any element
        std::vector<std::string> ids;
        std::vector<std::string> classes;
        std::vector<AttrTest> attrs;
        std::vector<std::string> contains;
    };

    enum class Combinator { Descendant, Child };

    // compounds[0] is leftmost; combinators[i] joins compounds[i] and compounds[i+1].
    struct Complex {
        std::vector<Compound> compounds;
        std::vector<Combinator> combinators;
    };

    friend class SelectorParser;

    static bool matches_compound(const Compound& c, const Dom::Element& el);
    static bool matches_from(const Complex& complex, std::size_t index, const Dom& dom, int element);

    std::string text_;
    std::vector<Complex> alternatives_;
};

// Document-order matches of a selector given as text.
std::vector<int> match_selector(std::string_view selector, const Dom& dom);

}  // namespace ac4a
