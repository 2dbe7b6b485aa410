#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ac4a {

// Parsed, immutable HTML document. Elements are stored in document order;
// an element's index in `elements()` is its id within this snapshot.
class Dom {
public:
    struct Element {
        std::string tag;  // lowercase
        std::vector<std::pair<std::string, std::string>> attributes;  // names lowercase
        int parent = -1;
        std::vector<int> children;  // element children only
        std::string path;           // slash-joined element-child indices from the document root
        std::string text;           // concatenated descendant text, entities decoded

        const std::string* attribute(std::string_view name) const;
        bool has_class(std::string_view cls) const;
    };

    static Dom parse(std::string_view html);

    const std::vector<Element>& elements() const { return elements_; }
    const Element& element(int id) const { return elements_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return elements_.size(); }

    // Id of the element at `path`, or -1.
    int find_by_path(std::string_view path) const;

private:
    std::vector<Element> elements_;
};

std::string decode_entities(std::string_view text);

}  // namespace ac4a
