#include "mathcrawl/mathml.hpp"

#include <map>
#include <memory>
#include <vector>

#include "mathcrawl/textutil.hpp"

namespace mathcrawl::render {

// decode_entities lives in render.cpp
std::string decode_entities(std::string_view s);

namespace {

struct Node {
    std::string tag;  // empty for text nodes
    std::string text;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<std::unique_ptr<Node>> children;

    std::string attr(std::string_view name) const {
        for (const auto& [k, v] : attrs)
            if (text::iequals(k, name)) return v;
        return {};
    }
};

// Minimal XML-ish parser for a MathML fragment (forgiving: unclosed
// tags close at parent end).
class FragmentParser {
public:
    explicit FragmentParser(std::string_view src) : src_(src) {}

    std::vector<std::unique_ptr<Node>> parse() {
        std::vector<std::unique_ptr<Node>> roots;
        parse_children(roots, "");
        return roots;
    }

private:
    void parse_children(std::vector<std::unique_ptr<Node>>& out, const std::string& parent) {
        while (pos_ < src_.size()) {
            if (src_[pos_] == '<') {
                if (src_.substr(pos_).starts_with("<!--")) {
                    size_t end = src_.find("-->", pos_);
                    pos_ = end == std::string_view::npos ? src_.size() : end + 3;
                    continue;
                }
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                    size_t gt = src_.find('>', pos_);
                    std::string name = text::to_lower(text::trim(
                        std::string(src_.substr(pos_ + 2, (gt == std::string_view::npos
                                                               ? src_.size()
                                                               : gt) -
                                                              pos_ - 2))));
                    pos_ = gt == std::string_view::npos ? src_.size() : gt + 1;
                    if (name == parent) return;
                    continue;  // stray close tag
                }
                auto node = parse_element();
                if (node) out.push_back(std::move(node));
            } else {
                size_t lt = src_.find('<', pos_);
                if (lt == std::string_view::npos) lt = src_.size();
                std::string raw(src_.substr(pos_, lt - pos_));
                pos_ = lt;
                std::string t = decode_entities(raw);
                if (!text::trim(t).empty()) {
                    auto n = std::make_unique<Node>();
                    n->text = text::trim(text::collapse_whitespace(t));
                    out.push_back(std::move(n));
                }
            }
        }
    }

    std::unique_ptr<Node> parse_element() {
        size_t gt = src_.find('>', pos_);
        if (gt == std::string_view::npos) {
            pos_ = src_.size();
            return nullptr;
        }
        std::string_view tag_src = src_.substr(pos_ + 1, gt - pos_ - 1);
        bool self_close = !tag_src.empty() && tag_src.back() == '/';
        if (self_close) tag_src.remove_suffix(1);
        pos_ = gt + 1;

        auto node = std::make_unique<Node>();
        size_t i = 0;
        while (i < tag_src.size() && !std::isspace(static_cast<unsigned char>(tag_src[i]))) ++i;
        node->tag = text::to_lower(std::string(tag_src.substr(0, i)));
        // drop namespace prefixes like m:mi
        size_t colon = node->tag.find(':');
        if (colon != std::string::npos) node->tag = node->tag.substr(colon + 1);

        while (i < tag_src.size()) {
            while (i < tag_src.size() && std::isspace(static_cast<unsigned char>(tag_src[i])))
                ++i;
            size_t name_start = i;
            while (i < tag_src.size() && tag_src[i] != '=' &&
                   !std::isspace(static_cast<unsigned char>(tag_src[i])))
                ++i;
            if (i == name_start) break;
            std::string name = text::to_lower(std::string(tag_src.substr(name_start, i - name_start)));
            std::string value;
            if (i < tag_src.size() && tag_src[i] == '=') {
                ++i;
                if (i < tag_src.size() && (tag_src[i] == '"' || tag_src[i] == '\'')) {
                    char q = tag_src[i++];
                    size_t vstart = i;
                    while (i < tag_src.size() && tag_src[i] != q) ++i;
                    value = std::string(tag_src.substr(vstart, i - vstart));
                    if (i < tag_src.size()) ++i;
                } else {
                    size_t vstart = i;
                    while (i < tag_src.size() &&
                           !std::isspace(static_cast<unsigned char>(tag_src[i])))
                        ++i;
                    value = std::string(tag_src.substr(vstart, i - vstart));
                }
            }
            node->attrs.emplace_back(name, decode_entities(value));
        }

        if (!self_close) parse_children(node->children, node->tag);
        return node;
    }

    std::string_view src_;
    size_t pos_ = 0;
};

const std::map<std::string, std::string>& op_map() {
    static const std::map<std::string, std::string> m = {
        {"\u00D7", "\\times"},   {"\u00F7", "\\div"},     {"\u2264", "\\leq"},
        {"\u2265", "\\geq"},     {"\u2260", "\\neq"},     {"\u2212", "-"},
        {"\u00B1", "\\pm"},      {"\u2213", "\\mp"},      {"\u22C5", "\\cdot"},
        {"\u00B7", "\\cdot"},    {"\u2218", "\\circ"},    {"\u221E", "\\infty"},
        {"\u2211", "\\sum"},     {"\u220F", "\\prod"},    {"\u222B", "\\int"},
        {"\u221A", "\\sqrt"},    {"\u2202", "\\partial"}, {"\u2207", "\\nabla"},
        {"\u2208", "\\in"},      {"\u2209", "\\notin"},   {"\u2282", "\\subset"},
        {"\u2286", "\\subseteq"},{"\u222A", "\\cup"},     {"\u2229", "\\cap"},
        {"\u2192", "\\to"},      {"\u21D2", "\\Rightarrow"}, {"\u2248", "\\approx"},
        {"\u2261", "\\equiv"},   {"\u03C0", "\\pi"},      {"\u2026", "\\ldots"},
        {"\u2032", "'"},         {"{", "\\{"},            {"}", "\\}"},
    };
    return m;
}

const std::map<std::string, std::string>& greek_map() {
    static const std::map<std::string, std::string> m = {
        {"\u03B1", "\\alpha"}, {"\u03B2", "\\beta"},  {"\u03B3", "\\gamma"},
        {"\u03B4", "\\delta"}, {"\u03B5", "\\epsilon"}, {"\u03B8", "\\theta"},
        {"\u03BB", "\\lambda"}, {"\u03BC", "\\mu"},   {"\u03C0", "\\pi"},
        {"\u03C3", "\\sigma"}, {"\u03C6", "\\phi"},   {"\u03C9", "\\omega"},
        {"\u0394", "\\Delta"}, {"\u03A3", "\\Sigma"}, {"\u03A9", "\\Omega"},
    };
    return m;
}

const char* const kFunctionNames[] = {"sin", "cos",  "tan", "log", "ln",
                                      "exp", "lim",  "min", "max", "det",
                                      "gcd", "sinh", "cosh", "tanh"};

bool is_known_function(const std::string& s) {
    for (const char* f : kFunctionNames)
        if (s == f) return true;
    return false;
}

// wrap in braces unless a single character or an existing group
std::string braced(const std::string& s) {
    if (s.size() == 1) return s;
    if (s.size() >= 2 && s.front() == '{' && s.back() == '}') return s;
    return "{" + s + "}";
}

struct Emitter {
    bool had_unknown = false;

    std::string children_joined(const Node& n) {
        std::string out;
        for (const auto& c : n.children) {
            std::string piece = emit(*c);
            if (piece.empty()) continue;
            if (!out.empty()) out += " ";
            out += piece;
        }
        return out;
    }

    std::string text_content(const Node& n) {
        if (n.tag.empty()) return n.text;
        std::string out;
        for (const auto& c : n.children) {
            std::string piece = text_content(*c);
            if (piece.empty()) continue;
            if (!out.empty()) out += " ";
            out += piece;
        }
        return out;
    }

    std::string nth(const Node& n, size_t i) {
        size_t seen = 0;
        for (const auto& c : n.children) {
            if (c->tag.empty() && text::trim(c->text).empty()) continue;
            if (seen == i) return emit(*c);
            ++seen;
        }
        return {};
    }

    std::string emit(const Node& n) {
        if (n.tag.empty()) return n.text;
        const std::string& t = n.tag;

        if (t == "mi") {
            std::string s = text_content(n);
            auto g = greek_map().find(s);
            if (g != greek_map().end()) return g->second;
            if (is_known_function(s)) return "\\" + s;
            return s;
        }
        if (t == "mn" || t == "mtext" || t == "ms") return text_content(n);
        if (t == "mo") {
            std::string s = text_content(n);
            auto it = op_map().find(s);
            return it != op_map().end() ? it->second : s;
        }
        if (t == "mrow" || t == "mstyle" || t == "mpadded" || t == "merror" ||
            t == "mphantom" || t == "math")
            return children_joined(n);
        if (t == "msup") return braced(nth(n, 0)) + "^" + braced(nth(n, 1));
        if (t == "msub") return braced(nth(n, 0)) + "_" + braced(nth(n, 1));
        if (t == "msubsup")
            return braced(nth(n, 0)) + "_" + braced(nth(n, 1)) + "^" + braced(nth(n, 2));
        if (t == "mfrac") return "\\frac{" + nth(n, 0) + "}{" + nth(n, 1) + "}";
        if (t == "msqrt") return "\\sqrt{" + children_joined(n) + "}";
        if (t == "mroot") return "\\sqrt[" + nth(n, 1) + "]{" + nth(n, 0) + "}";
        if (t == "mover") return braced(nth(n, 0)) + "^" + braced(nth(n, 1));
        if (t == "munder") return braced(nth(n, 0)) + "_" + braced(nth(n, 1));
        if (t == "munderover")
            return braced(nth(n, 0)) + "_" + braced(nth(n, 1)) + "^" + braced(nth(n, 2));
        if (t == "mspace") return " ";
        if (t == "mfenced") {
            std::string open = n.attr("open").empty() && n.attrs.empty() ? "(" : n.attr("open");
            std::string close = n.attr("close").empty() && n.attrs.empty() ? ")" : n.attr("close");
            if (open.empty() && n.attr("open").empty()) open = "(";
            if (close.empty() && n.attr("close").empty()) close = ")";
            std::string body;
            bool first = true;
            for (const auto& c : n.children) {
                std::string piece = emit(*c);
                if (piece.empty()) continue;
                if (!first) body += ", ";
                body += piece;
                first = false;
            }
            return open + body + close;
        }
        if (t == "mtable") {
            std::string rows;
            for (const auto& row : n.children) {
                if (row->tag != "mtr" && row->tag != "mlabeledtr") continue;
                std::string cells;
                for (const auto& cell : row->children) {
                    if (cell->tag != "mtd") continue;
                    if (!cells.empty()) cells += " & ";
                    cells += children_joined(*cell);
                }
                if (!rows.empty()) rows += " \\\\ ";
                rows += cells;
            }
            return "\\begin{matrix} " + rows + " \\end{matrix}";
        }
        if (t == "semantics") {
            // prefer an embedded TeX annotation
            for (const auto& c : n.children) {
                if (c->tag == "annotation") {
                    std::string enc = text::to_lower(c->attr("encoding"));
                    if (enc.find("tex") != std::string::npos) {
                        std::string tex = text::trim(text_content(*c));
                        if (!tex.empty()) return tex;
                    }
                }
            }
            for (const auto& c : n.children) {
                if (c->tag == "annotation" || c->tag == "annotation-xml") continue;
                std::string piece = emit(*c);
                if (!piece.empty()) return piece;
            }
            return {};
        }
        if (t == "annotation" || t == "annotation-xml") return {};

        had_unknown = true;
        return text_content(n);
    }
};

}  // namespace

MathmlResult mathml_to_tex(std::string_view inner_mathml, std::string_view math_attrs) {
    MathmlResult res;
    std::string attrs_lower = text::to_lower(std::string(math_attrs));
    res.display = attrs_lower.find("display=\"block\"") != std::string::npos ||
                  attrs_lower.find("display='block'") != std::string::npos ||
                  attrs_lower.find("display=block") != std::string::npos;

    FragmentParser parser(inner_mathml);
    auto roots = parser.parse();
    Emitter em;
    std::string out;
    for (const auto& r : roots) {
        std::string piece = em.emit(*r);
        if (piece.empty()) continue;
        if (!out.empty()) out += " ";
        out += piece;
    }
    res.tex = text::trim(out);
    res.had_unknown = em.had_unknown;
    return res;
}

}  // namespace mathcrawl::render
