#include "mathcrawl/render.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>

#include "mathcrawl/mathml.hpp"
#include "mathcrawl/textutil.hpp"

namespace mathcrawl::render {

namespace {

// ---------------------------------------------------------------- entities

const std::map<std::string, const char*>& entity_map() {
    static const std::map<std::string, const char*> m = {
        {"amp", "&"},        {"lt", "<"},         {"gt", ">"},        {"quot", "\""},
        {"apos", "'"},       {"nbsp", " "},       {"times", "×"}, {"divide", "÷"},
        {"le", "≤"},    {"ge", "≥"},    {"ne", "≠"},   {"minus", "−"},
        {"plusmn", "±"}, {"middot", "·"}, {"sdot", "⋅"}, {"deg", "°"},
        {"pi", "π"},    {"radic", "√"}, {"infin", "∞"}, {"sum", "∑"},
        {"int", "∫"},   {"prod", "∏"},  {"asymp", "≈"}, {"equiv", "≡"},
        {"rarr", "→"},  {"larr", "←"},  {"rArr", "⇒"},  {"hellip", "…"},
        {"ndash", "–"}, {"mdash", "—"}, {"lsquo", "‘"}, {"rsquo", "’"},
        {"ldquo", "“"}, {"rdquo", "”"}, {"copy", "©"},  {"reg", "®"},
        {"trade", "™"}, {"sect", "§"},  {"para", "¶"},  {"laquo", "«"},
        {"raquo", "»"}, {"sup2", "²"},  {"sup3", "³"},  {"frac12", "½"},
        {"frac14", "¼"}, {"alpha", "α"}, {"beta", "β"}, {"gamma", "γ"},
        {"delta", "δ"}, {"epsilon", "ε"}, {"theta", "θ"}, {"lambda", "λ"},
        {"mu", "μ"},    {"sigma", "σ"}, {"phi", "φ"},  {"omega", "ω"},
        {"Delta", "Δ"}, {"Sigma", "Σ"}, {"Omega", "Ω"}, {"partial", "∂"},
        {"nabla", "∇"}, {"isin", "∈"},  {"notin", "∉"}, {"sube", "⊆"},
        {"cup", "∪"},   {"cap", "∩"},   {"forall", "∀"}, {"exist", "∃"},
        {"empty", "∅"}, {"prime", "′"}, {"Prime", "″"}, {"bull", "•"},
    };
    return m;
}

void append_codepoint(std::string& out, uint32_t cp) {
    if (cp == 0 || cp > 0x10FFFF) cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 32) {
            out.push_back(s[i++]);
            continue;
        }
        std::string_view name = s.substr(i + 1, semi - i - 1);
        if (!name.empty() && name[0] == '#') {
            uint32_t cp = 0;
            bool ok = name.size() > 1;
            if (name.size() > 2 && (name[1] == 'x' || name[1] == 'X')) {
                for (size_t k = 2; k < name.size() && ok; ++k) {
                    char c = name[k];
                    cp <<= 4;
                    if (c >= '0' && c <= '9') cp |= static_cast<uint32_t>(c - '0');
                    else if (c >= 'a' && c <= 'f') cp |= static_cast<uint32_t>(c - 'a' + 10);
                    else if (c >= 'A' && c <= 'F') cp |= static_cast<uint32_t>(c - 'A' + 10);
                    else ok = false;
                }
            } else {
                for (size_t k = 1; k < name.size() && ok; ++k) {
                    char c = name[k];
                    if (c < '0' || c > '9') { ok = false; break; }
                    cp = cp * 10 + static_cast<uint32_t>(c - '0');
                }
            }
            if (ok) {
                append_codepoint(out, cp);
                i = semi + 1;
                continue;
            }
        } else {
            auto it = entity_map().find(std::string(name));
            if (it != entity_map().end()) {
                out.append(it->second);
                i = semi + 1;
                continue;
            }
        }
        out.push_back(s[i++]);
    }
    return out;
}

// --------------------------------------------------------------- tokenizer

namespace {

struct Tag {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::string raw_attrs;
    bool closing = false;
    bool self_closing = false;

    std::string attr(std::string_view key) const {
        for (const auto& [k, v] : attrs)
            if (text::iequals(k, key)) return v;
        return {};
    }
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    bool eof() const { return pos_ >= src_.size(); }

    enum class Kind { Text, TagTok, Skip };

    Kind next(std::string& txt, Tag& tag) {
        if (src_[pos_] != '<') {
            size_t lt = src_.find('<', pos_);
            if (lt == std::string_view::npos) lt = src_.size();
            txt = std::string(src_.substr(pos_, lt - pos_));
            pos_ = lt;
            return Kind::Text;
        }
        std::string_view rest = src_.substr(pos_);
        if (rest.starts_with("<!--")) {
            size_t end = src_.find("-->", pos_ + 4);
            pos_ = end == std::string_view::npos ? src_.size() : end + 3;
            return Kind::Skip;
        }
        if (rest.size() >= 2 && (rest[1] == '!' || rest[1] == '?')) {
            size_t end = src_.find('>', pos_);
            pos_ = end == std::string_view::npos ? src_.size() : end + 1;
            return Kind::Skip;
        }
        if (rest.size() >= 2 &&
            (std::isalpha(static_cast<unsigned char>(rest[1])) ||
             (rest[1] == '/' && rest.size() >= 3 &&
              std::isalpha(static_cast<unsigned char>(rest[2]))))) {
            return parse_tag(tag) ? Kind::TagTok : Kind::Skip;
        }
        txt = "<";  // stray '<'
        ++pos_;
        return Kind::Text;
    }

    // Raw content through the next matching close tag (case-insensitive);
    // consumes the close tag. Falls back to the rest of the input.
    std::string raw_until_close(std::string_view name) {
        std::string needle = "</" + std::string(name);
        size_t search = pos_;
        while (true) {
            size_t hit = find_ci(needle, search);
            if (hit == std::string_view::npos) {
                std::string content(src_.substr(pos_));
                pos_ = src_.size();
                return content;
            }
            size_t after = hit + needle.size();
            size_t j = after;
            while (j < src_.size() && std::isspace(static_cast<unsigned char>(src_[j]))) ++j;
            if (j < src_.size() && src_[j] == '>') {
                std::string content(src_.substr(pos_, hit - pos_));
                pos_ = j + 1;
                return content;
            }
            if (j >= src_.size()) {
                std::string content(src_.substr(pos_, hit - pos_));
                pos_ = src_.size();
                return content;
            }
            search = after;
        }
    }

    // Raw inner content of an element that may nest (e.g. <math>).
    std::string raw_until_close_nested(std::string_view name) {
        std::string open_needle = "<" + std::string(name);
        std::string close_needle = "</" + std::string(name);
        int depth = 1;
        size_t scan = pos_;
        while (true) {
            size_t open_hit = find_ci(open_needle, scan);
            size_t close_hit = find_ci(close_needle, scan);
            if (close_hit == std::string_view::npos) {
                std::string content(src_.substr(pos_));
                pos_ = src_.size();
                return content;
            }
            if (open_hit != std::string_view::npos && open_hit < close_hit) {
                size_t after = open_hit + open_needle.size();
                char c = after < src_.size() ? src_[after] : '>';
                if (c == '>' || c == '/' || std::isspace(static_cast<unsigned char>(c))) {
                    ++depth;
                    scan = after;
                } else {
                    scan = open_hit + 1;
                }
                continue;
            }
            --depth;
            if (depth == 0) {
                std::string content(src_.substr(pos_, close_hit - pos_));
                size_t gt = src_.find('>', close_hit);
                pos_ = gt == std::string_view::npos ? src_.size() : gt + 1;
                return content;
            }
            scan = close_hit + close_needle.size();
        }
    }

private:
    size_t find_ci(std::string_view needle, size_t from) const {
        if (needle.empty()) return std::string_view::npos;
        char first_lo = static_cast<char>(std::tolower(static_cast<unsigned char>(needle[0])));
        for (size_t i = from; i + needle.size() <= src_.size(); ++i) {
            if (std::tolower(static_cast<unsigned char>(src_[i])) != first_lo) continue;
            bool match = true;
            for (size_t k = 1; k < needle.size(); ++k) {
                if (std::tolower(static_cast<unsigned char>(src_[i + k])) !=
                    std::tolower(static_cast<unsigned char>(needle[k]))) {
                    match = false;
                    break;
                }
            }
            if (match) return i;
        }
        return std::string_view::npos;
    }

    bool parse_tag(Tag& tag) {
        size_t gt = src_.find('>', pos_);
        if (gt == std::string_view::npos) {
            pos_ = src_.size();
            return false;
        }
        std::string_view body = src_.substr(pos_ + 1, gt - pos_ - 1);
        pos_ = gt + 1;
        tag = Tag{};
        if (!body.empty() && body[0] == '/') {
            tag.closing = true;
            body.remove_prefix(1);
        }
        if (!body.empty() && body.back() == '/') {
            tag.self_closing = true;
            body.remove_suffix(1);
        }
        size_t i = 0;
        while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        tag.name = text::to_lower(std::string(body.substr(0, i)));
        tag.raw_attrs = std::string(body.substr(i));
        while (i < body.size()) {
            while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
            size_t nstart = i;
            while (i < body.size() && body[i] != '=' &&
                   !std::isspace(static_cast<unsigned char>(body[i])))
                ++i;
            if (i == nstart) break;
            std::string name = text::to_lower(std::string(body.substr(nstart, i - nstart)));
            std::string value;
            size_t save = i;
            while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
            if (i < body.size() && body[i] == '=') {
                ++i;
                while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
                if (i < body.size() && (body[i] == '"' || body[i] == '\'')) {
                    char q = body[i++];
                    size_t vstart = i;
                    while (i < body.size() && body[i] != q) ++i;
                    value = std::string(body.substr(vstart, i - vstart));
                    if (i < body.size()) ++i;
                } else {
                    size_t vstart = i;
                    while (i < body.size() &&
                           !std::isspace(static_cast<unsigned char>(body[i])))
                        ++i;
                    value = std::string(body.substr(vstart, i - vstart));
                }
            } else {
                i = save;  // bare attribute, no value
            }
            tag.attrs.emplace_back(name, decode_entities(value));
        }
        return !tag.name.empty();
    }

    std::string_view src_;
    size_t pos_ = 0;
};

// Remove markup from verbatim content, byte-preserving the text: tags
// and comments are dropped, <br> becomes a newline, entities are left
// untouched so re-rendering verbatim output is the identity.
std::string strip_markup(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '<') {
            out.push_back(s[i++]);
            continue;
        }
        std::string_view rest = s.substr(i);
        if (rest.starts_with("<!--")) {
            size_t end = s.find("-->", i + 4);
            i = end == std::string_view::npos ? s.size() : end + 3;
            continue;
        }
        bool tagish = rest.size() >= 2 &&
                      (std::isalpha(static_cast<unsigned char>(rest[1])) || rest[1] == '!' ||
                       rest[1] == '?' ||
                       (rest[1] == '/' && rest.size() >= 3 &&
                        std::isalpha(static_cast<unsigned char>(rest[2]))));
        if (!tagish) {
            out.push_back(s[i++]);
            continue;
        }
        size_t gt = s.find('>', i);
        if (gt == std::string_view::npos) {
            i = s.size();
            continue;
        }
        std::string tag = text::to_lower(std::string(s.substr(i + 1, gt - i - 1)));
        if (tag == "br" || tag == "br/" || tag == "br /") out.push_back('\n');
        i = gt + 1;
    }
    return out;
}

// ------------------------------------------------------------ layout engine

bool is_void_element(const std::string& t) {
    static const std::set<std::string> v = {"br",    "img",  "hr",   "meta",   "link",
                                            "input", "area", "base", "col",    "embed",
                                            "source", "track", "wbr", "param"};
    return v.count(t) > 0;
}

bool is_block_element(const std::string& t) {
    static const std::set<std::string> v = {
        "p",       "div",     "h1",     "h2",      "h3",     "h4",   "h5",   "h6",
        "ul",      "ol",      "li",     "table",   "tr",     "td",   "th",   "thead",
        "tbody",   "tfoot",   "blockquote",        "hr",     "form", "fieldset",
        "section", "article", "header", "footer",  "nav",    "aside", "main",
        "figure",  "figcaption", "address", "dl",  "dt",     "dd",   "caption",
        "center",  "details", "summary", "dialog", "body",   "html"};
    return v.count(t) > 0;
}

struct Atom {
    std::string text;
    int region = -1;  // index into pending regions; -1 for plain words
};

struct LaidLine {
    std::string prefix;
    std::string hang;
    std::vector<Atom> atoms;
};

struct Block {
    enum Kind { kLines, kVerbatim };
    Kind kind = kLines;
    std::vector<LaidLine> lines;
    std::string verbatim;
};

struct PendingRegion {
    MathForm form;
    std::string payload;
    bool display;
};

constexpr int kMaxDepth = 512;

class LayoutEngine {
public:
    LayoutEngine(std::string_view html, const RenderConfig& cfg) : lex_(html), cfg_(cfg) {}

    RenderResult run() {
        std::string txt;
        Tag tag;
        while (!lex_.eof()) {
            auto kind = lex_.next(txt, tag);
            if (kind == Lexer::Kind::Skip) continue;
            if (kind == Lexer::Kind::Text)
                handle_text(txt);
            else
                handle_tag(tag);
        }
        flush_paragraph();
        flush_list_block();
        return assemble();
    }

private:
    struct ListCtx {
        bool ordered = false;
        int counter = 0;
    };

    struct TableCtx {
        std::vector<LaidLine> rows;
        std::vector<Atom> row_atoms;
        bool row_open = false;
        bool cell_open = false;
    };

    void handle_text(const std::string& raw) {
        if (drop_depth_ > 0) return;
        std::string decoded = decode_entities(raw);
        for (char ch : decoded) {
            unsigned char c = static_cast<unsigned char>(ch);
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f')
                finish_word();
            else
                word_.push_back(ch);
        }
    }

    void handle_tag(const Tag& tag) {
        const std::string& t = tag.name;

        if (!tag.closing) {
            if (t == "script") {
                std::string type = text::to_lower(tag.attr("type"));
                std::string body = lex_.raw_until_close("script");
                if (drop_depth_ > 0) return;
                if (cfg_.math_passthrough && type.find("math/tex") != std::string::npos) {
                    bool display = type.find("mode=display") != std::string::npos;
                    add_math_atom(MathForm::script_tex, text::trim(body), display);
                }
                return;
            }
            if (t == "style" || t == "template" || t == "iframe" || t == "svg" ||
                t == "object" || t == "title") {
                lex_.raw_until_close(t);
                return;
            }
            if (t == "pre" || t == "textarea") {
                std::string body = strip_markup(lex_.raw_until_close(t));
                if (drop_depth_ > 0) return;
                if (!cfg_.preserve_verbatim) {
                    handle_text(body);
                    flush_paragraph();
                    return;
                }
                flush_paragraph();
                Block b;
                b.kind = Block::kVerbatim;
                b.verbatim = std::move(body);
                if (!b.verbatim.empty()) blocks_.push_back(std::move(b));
                return;
            }
            if (t == "code") {
                std::string body = strip_markup(lex_.raw_until_close(t));
                if (drop_depth_ > 0) return;
                if (!cfg_.preserve_verbatim) {
                    handle_text(body);
                    return;
                }
                finish_word();
                if (!body.empty()) atoms_.push_back(Atom{std::move(body), -1});
                return;
            }
            if (t == "math") {
                std::string inner = lex_.raw_until_close_nested("math");
                if (drop_depth_ > 0 || !cfg_.math_passthrough) return;
                MathmlResult mr = mathml_to_tex(inner, tag.raw_attrs);
                if (mr.had_unknown) warnings_.insert("mathml_unknown_element");
                if (!mr.tex.empty()) add_math_atom(MathForm::mathml, mr.tex, mr.display);
                return;
            }
            if (t == "img") {
                if (drop_depth_ > 0) return;
                std::string alt = text::trim(tag.attr("alt"));
                if (!alt.empty()) {
                    if (cfg_.math_passthrough && looks_like_tex(alt)) {
                        add_math_atom(MathForm::image_alt, alt, false);
                    } else {
                        finish_word();
                        atoms_.push_back(Atom{"[" + alt + "]", -1});
                    }
                } else {
                    std::string src = tag.attr("src");
                    size_t slash = src.find_last_of('/');
                    std::string base = slash == std::string::npos ? src : src.substr(slash + 1);
                    if (!base.empty()) {
                        finish_word();
                        atoms_.push_back(Atom{"[" + base + "]", -1});
                    }
                }
                return;
            }
            if (t == "br") {
                if (drop_depth_ > 0) return;
                line_break();
                return;
            }
            if (t == "hr") {
                if (drop_depth_ > 0) return;
                flush_paragraph();
                Block b;
                b.lines.push_back(LaidLine{
                    "", "",
                    {Atom{std::string(static_cast<size_t>(std::min(cfg_.line_width, 40)), '-'),
                          -1}}});
                blocks_.push_back(std::move(b));
                return;
            }
        } else {
            if (t == "script" || t == "style" || t == "title" || t == "pre" || t == "code" ||
                t == "math" || t == "textarea")
                return;  // stray closers for raw-text elements
        }

        if (!is_void_element(t)) {
            if (!tag.closing) {
                ++depth_;
                if (depth_ > kMaxDepth) {
                    if (drop_depth_ == 0) warnings_.insert("depth_truncated");
                    ++drop_depth_;
                }
                if (tag.self_closing) {
                    if (drop_depth_ > 0) --drop_depth_;
                    --depth_;
                }
            } else {
                if (drop_depth_ > 0) --drop_depth_;
                if (depth_ > 0) --depth_;
            }
        }
        if (drop_depth_ > 0) return;
        if (!is_block_element(t)) return;  // inline tags: the word continues

        if (!tag.closing) {
            switch (classify(t)) {
                case TagClass::List:
                    flush_paragraph();
                    lists_.push_back(ListCtx{t == "ol", 0});
                    break;
                case TagClass::Item:
                    flush_item();
                    if (lists_.empty()) lists_.push_back(ListCtx{false, 0});
                    ++lists_.back().counter;
                    item_open_ = true;
                    break;
                case TagClass::Table:
                    flush_paragraph();
                    tables_.push_back(TableCtx{});
                    break;
                case TagClass::Row:
                    if (!tables_.empty()) {
                        flush_row();
                        tables_.back().row_open = true;
                    }
                    break;
                case TagClass::Cell:
                    if (!tables_.empty()) {
                        flush_cell();
                        tables_.back().cell_open = true;
                    }
                    break;
                case TagClass::Heading:
                    flush_paragraph();
                    heading_level_ = t[1] - '0';
                    break;
                default:
                    flush_paragraph();
                    break;
            }
        } else {
            switch (classify(t)) {
                case TagClass::List:
                    flush_item();
                    if (!lists_.empty()) lists_.pop_back();
                    if (lists_.empty()) flush_list_block();
                    break;
                case TagClass::Item:
                    flush_item();
                    break;
                case TagClass::Table:
                    if (!tables_.empty()) {
                        flush_row();
                        TableCtx ctx = std::move(tables_.back());
                        tables_.pop_back();
                        if (!ctx.rows.empty()) {
                            Block b;
                            b.lines = std::move(ctx.rows);
                            blocks_.push_back(std::move(b));
                        }
                    }
                    break;
                case TagClass::Row:
                    flush_row();
                    break;
                case TagClass::Cell:
                    flush_cell();
                    break;
                case TagClass::Heading:
                    flush_paragraph();
                    heading_level_ = 0;
                    break;
                default:
                    flush_paragraph();
                    break;
            }
        }
    }

    enum class TagClass { List, Item, Table, Row, Cell, Heading, Other };

    static TagClass classify(const std::string& t) {
        if (t == "ul" || t == "ol" || t == "dl") return TagClass::List;
        if (t == "li" || t == "dt" || t == "dd") return TagClass::Item;
        if (t == "table") return TagClass::Table;
        if (t == "tr") return TagClass::Row;
        if (t == "td" || t == "th") return TagClass::Cell;
        if (t.size() == 2 && t[0] == 'h' && t[1] >= '1' && t[1] <= '6') return TagClass::Heading;
        return TagClass::Other;
    }

    void finish_word() {
        if (word_.empty()) return;
        atoms_.push_back(Atom{std::move(word_), -1});
        word_.clear();
    }

    void add_math_atom(MathForm form, std::string payload, bool display) {
        if (payload.empty()) return;
        finish_word();
        pending_.push_back(PendingRegion{form, std::move(payload), display});
        atoms_.push_back(Atom{{}, static_cast<int>(pending_.size() - 1)});
    }

    void line_break() {
        finish_word();
        if (item_open_ || !tables_.empty()) return;  // soft break inside item/cell
        if (atoms_.empty()) return;
        para_lines_.push_back(LaidLine{current_prefix(), "", std::move(atoms_)});
        atoms_.clear();
    }

    std::string current_prefix() const {
        if (heading_level_ > 0)
            return std::string(static_cast<size_t>(heading_level_), '#') + " ";
        return "";
    }

    void flush_paragraph() {
        finish_word();
        if (!tables_.empty()) return;  // block tags inside a cell only split words
        if (item_open_) {
            flush_item();
            return;
        }
        if (!atoms_.empty()) {
            para_lines_.push_back(LaidLine{current_prefix(), "", std::move(atoms_)});
            atoms_.clear();
        }
        if (!para_lines_.empty()) {
            Block b;
            b.lines = std::move(para_lines_);
            para_lines_.clear();
            blocks_.push_back(std::move(b));
        }
    }

    void flush_item() {
        finish_word();
        if (!item_open_) {
            if (!atoms_.empty()) {
                para_lines_.push_back(LaidLine{"", "", std::move(atoms_)});
                atoms_.clear();
            }
            return;
        }
        item_open_ = false;
        int depth = static_cast<int>(std::max<size_t>(lists_.size(), 1));
        std::string indent(static_cast<size_t>(cfg_.list_indent * depth), ' ');
        std::string marker = lists_.empty() || !lists_.back().ordered
                                 ? "* "
                                 : std::to_string(lists_.back().counter) + ". ";
        std::string prefix = indent + marker;
        std::string hang(prefix.size(), ' ');
        list_lines_.push_back(LaidLine{prefix, hang, std::move(atoms_)});
        atoms_.clear();
    }

    void flush_list_block() {
        if (list_lines_.empty()) return;
        Block b;
        b.lines = std::move(list_lines_);
        list_lines_.clear();
        blocks_.push_back(std::move(b));
    }

    void flush_cell() {
        finish_word();
        if (tables_.empty()) return;
        TableCtx& ctx = tables_.back();
        if (!ctx.cell_open) {
            atoms_.clear();
            return;
        }
        ctx.cell_open = false;
        if (!ctx.row_atoms.empty()) ctx.row_atoms.push_back(Atom{"|", -1});
        for (auto& a : atoms_) ctx.row_atoms.push_back(std::move(a));
        atoms_.clear();
    }

    void flush_row() {
        if (tables_.empty()) return;
        flush_cell();
        TableCtx& ctx = tables_.back();
        if (!ctx.row_open) return;
        ctx.row_open = false;
        if (!ctx.row_atoms.empty())
            ctx.rows.push_back(LaidLine{"", "", std::move(ctx.row_atoms)});
        ctx.row_atoms.clear();
    }

    RenderResult assemble() {
        RenderResult res;
        std::string& out = res.text;
        bool first_block = true;
        for (const auto& block : blocks_) {
            if (block.kind == Block::kVerbatim) {
                if (!first_block) out += "\n\n";
                out += block.verbatim;
                first_block = false;
                continue;
            }
            if (block.lines.empty()) continue;
            if (!first_block) out += "\n\n";
            bool first_line = true;
            for (const auto& line : block.lines) {
                if (!first_line) out += "\n";
                emit_wrapped(out, line, res);
                first_line = false;
            }
            first_block = false;
        }
        res.warnings = std::move(warnings_);
        return res;
    }

    void emit_wrapped(std::string& out, const LaidLine& line, RenderResult& res) {
        size_t width = static_cast<size_t>(std::max(cfg_.line_width, 20));
        size_t line_start = out.size();
        out += line.prefix;
        bool line_has_word = false;
        for (const auto& atom : line.atoms) {
            const std::string& word =
                atom.region >= 0 ? pending_[static_cast<size_t>(atom.region)].payload
                                 : atom.text;
            size_t cur_len = out.size() - line_start;
            if (line_has_word && cur_len + 1 + word.size() > width) {
                out += "\n";
                line_start = out.size();
                out += line.hang;
                line_has_word = false;
            }
            if (line_has_word) out += " ";
            if (atom.region >= 0) {
                const PendingRegion& pr = pending_[static_cast<size_t>(atom.region)];
                MathRegion r;
                r.form = pr.form;
                r.display = pr.display;
                r.begin = out.size();
                out += pr.payload;
                r.end = out.size();
                r.payload = pr.payload;
                res.regions.push_back(std::move(r));
            } else {
                out += word;
            }
            line_has_word = true;
        }
    }

    Lexer lex_;
    RenderConfig cfg_;
    std::string word_;
    std::vector<Atom> atoms_;
    std::vector<LaidLine> para_lines_;
    std::vector<LaidLine> list_lines_;
    std::vector<ListCtx> lists_;
    std::vector<TableCtx> tables_;
    std::vector<Block> blocks_;
    std::vector<PendingRegion> pending_;
    std::set<std::string> warnings_;
    bool item_open_ = false;
    int heading_level_ = 0;
    int depth_ = 0;
    int drop_depth_ = 0;
};

}  // namespace

std::string_view math_form_name(MathForm f) {
    switch (f) {
        case MathForm::mathml: return "mathml";
        case MathForm::script_tex: return "script_tex";
        case MathForm::dollar_inline: return "dollar_inline";
        case MathForm::dollar_display: return "dollar_display";
        case MathForm::shortcode: return "shortcode";
        case MathForm::image_alt: return "image_alt";
        case MathForm::unicode_math: return "unicode_math";
    }
    return "unknown";
}

MathForm math_form_from_name(std::string_view name) {
    if (name == "mathml") return MathForm::mathml;
    if (name == "script_tex") return MathForm::script_tex;
    if (name == "dollar_inline") return MathForm::dollar_inline;
    if (name == "dollar_display") return MathForm::dollar_display;
    if (name == "shortcode") return MathForm::shortcode;
    if (name == "image_alt") return MathForm::image_alt;
    if (name == "unicode_math") return MathForm::unicode_math;
    throw std::invalid_argument("unknown math form: " + std::string(name));
}

nlohmann::json MathRegion::to_json() const {
    return {{"form", std::string(math_form_name(form))},
            {"begin", begin},
            {"end", end},
            {"payload", payload},
            {"display", display}};
}

MathRegion MathRegion::from_json(const nlohmann::json& j) {
    MathRegion r;
    r.form = math_form_from_name(j.at("form").get<std::string>());
    r.begin = j.at("begin").get<size_t>();
    r.end = j.at("end").get<size_t>();
    r.payload = j.at("payload").get<std::string>();
    r.display = j.value("display", false);
    return r;
}

RenderResult render(std::string_view raw_html, const RenderConfig& config) {
    LayoutEngine engine(raw_html, config);
    return engine.run();
}

bool looks_like_tex(std::string_view s) {
    for (size_t i = 0; i + 1 < s.size(); ++i)
        if (s[i] == '\\' && std::isalpha(static_cast<unsigned char>(s[i + 1]))) return true;
    bool has_brace =
        s.find('{') != std::string_view::npos && s.find('}') != std::string_view::npos;
    bool has_script =
        s.find('^') != std::string_view::npos || s.find('_') != std::string_view::npos;
    if (has_brace && has_script) return true;
    if (s.size() >= 3 && s.front() == '$' && s.back() == '$') return true;
    return false;
}

std::vector<MathRegion> extract_shortcode_math(std::string_view text) {
    std::vector<MathRegion> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t open = text.find("[latex", pos);
        if (open == std::string_view::npos) break;
        size_t open_end = open + 6;
        if (open_end < text.size() && text[open_end] != ']') {
            if (text[open_end] != ' ' && text[open_end] != '\t') {
                pos = open + 1;  // e.g. "[latexpage]": not a math shortcode
                continue;
            }
            size_t bracket = text.find(']', open_end);
            if (bracket == std::string_view::npos || bracket - open > 200) {
                pos = open + 1;
                continue;
            }
            open_end = bracket;
        }
        if (open_end >= text.size() || text[open_end] != ']') {
            pos = open + 1;
            continue;
        }
        size_t payload_start = open_end + 1;
        size_t close = text.find("[/latex]", payload_start);
        if (close == std::string_view::npos) break;  // unbalanced opener passes through
        std::string payload(text.substr(payload_start, close - payload_start));
        if (!payload.empty()) {
            MathRegion r;
            r.form = MathForm::shortcode;
            r.begin = open;
            r.end = close + 8;
            r.payload = std::move(payload);
            out.push_back(std::move(r));
        }
        pos = close + 8;
    }
    return out;
}

namespace {

bool digit_at(std::string_view s, size_t i) {
    return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
}

bool escaped_at(std::string_view s, size_t i) { return i > 0 && s[i - 1] == '\\'; }

bool payload_ok(std::string_view payload, bool allow_newlines) {
    if (mathcrawl::text::trim(payload).empty()) return false;
    if (payload.find("\n\n") != std::string_view::npos) return false;
    if (!allow_newlines && payload.find('\n') != std::string_view::npos) return false;
    return true;
}

void push_region(std::vector<MathRegion>& out, MathForm form, size_t begin, size_t end,
                 std::string_view payload, bool display) {
    MathRegion r;
    r.form = form;
    r.begin = begin;
    r.end = end;
    r.payload = std::string(payload);
    r.display = display;
    out.push_back(std::move(r));
}

}  // namespace

std::vector<MathRegion> detect_dollar_math(std::string_view text) {
    std::vector<MathRegion> out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (c == '\\' && i + 1 < n) {
            char d = text[i + 1];
            if (d == '$') {
                i += 2;  // escaped dollar never delimits
                continue;
            }
            if (d == '(') {
                size_t close = text.find("\\)", i + 2);
                if (close != std::string_view::npos) {
                    std::string_view payload = text.substr(i + 2, close - i - 2);
                    if (payload_ok(payload, false))
                        push_region(out, MathForm::dollar_inline, i, close + 2, payload, false);
                    i = close + 2;
                    continue;
                }
            }
            if (d == '[') {
                size_t close = text.find("\\]", i + 2);
                if (close != std::string_view::npos) {
                    std::string_view payload = text.substr(i + 2, close - i - 2);
                    if (payload_ok(payload, true))
                        push_region(out, MathForm::dollar_display, i, close + 2, payload, true);
                    i = close + 2;
                    continue;
                }
            }
            i += 2;
            continue;
        }
        if (c != '$') {
            ++i;
            continue;
        }
        if (i + 1 < n && text[i + 1] == '$') {
            size_t close = text.find("$$", i + 2);
            if (close != std::string_view::npos) {
                std::string_view payload = text.substr(i + 2, close - i - 2);
                if (payload_ok(payload, true))
                    push_region(out, MathForm::dollar_display, i, close + 2, payload, true);
                i = close + 2;
            } else {
                i += 2;
            }
            continue;
        }
        // currency heuristic: a digit adjacent to the dollar blocks opening
        if (digit_at(text, i + 1) || (i > 0 && digit_at(text, i - 1))) {
            ++i;
            continue;
        }
        size_t close = std::string_view::npos;
        for (size_t j = i + 1; j < n; ++j) {
            if (text[j] == '\n' && j + 1 < n && text[j + 1] == '\n') break;
            if (text[j] == '$' && !escaped_at(text, j)) {
                close = j;
                break;
            }
        }
        if (close == std::string_view::npos) {
            ++i;
            continue;
        }
        std::string_view payload = text.substr(i + 1, close - i - 1);
        if (payload_ok(payload, false)) {
            push_region(out, MathForm::dollar_inline, i, close + 1, payload, false);
            i = close + 1;
        } else {
            ++i;
        }
    }
    return out;
}

namespace {

const std::vector<std::string>& unicode_math_symbols() {
    static const std::vector<std::string> s = {
        "×", "÷", "≤", "≥", "−", "π", "√", "°",
        "±", "≠", "≈", "∞", "∑", "∫", "∏", "⋅",
        "²", "³", "½", "α", "β", "γ", "δ", "θ",
        "λ", "μ", "σ", "φ", "ω", "→", "∂", "∈",
        "∪", "∩",
    };
    return s;
}

bool token_has_math_symbol(std::string_view tok) {
    for (const auto& sym : unicode_math_symbols())
        if (tok.find(sym) != std::string_view::npos) return true;
    return false;
}

// Neighbors worth absorbing into a unicode-math span: symbols, numbers,
// single-letter variables, operator runs. Prose words stop the span.
bool token_extendable(std::string_view tok) {
    if (tok.empty()) return false;
    if (token_has_math_symbol(tok)) return true;
    if (tok.size() == 1) return true;
    bool has_digit = false;
    bool all_ops = true;
    for (char ch : tok) {
        if (std::isdigit(static_cast<unsigned char>(ch))) has_digit = true;
        if (!std::strchr("+-*/=^_()[]{}.,<>|", ch)) all_ops = false;
    }
    return has_digit || all_ops;
}

}  // namespace

std::vector<MathRegion> detect_unicode_math(std::string_view text) {
    std::vector<MathRegion> out;
    size_t line_start = 0;
    while (line_start <= text.size()) {
        size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string_view line = text.substr(line_start, line_end - line_start);

        std::vector<std::pair<size_t, std::string_view>> toks;
        size_t p = 0;
        while (p < line.size()) {
            while (p < line.size() && line[p] == ' ') ++p;
            size_t start = p;
            while (p < line.size() && line[p] != ' ') ++p;
            if (p > start) toks.emplace_back(start, line.substr(start, p - start));
        }
        size_t t = 0;
        while (t < toks.size()) {
            if (!token_has_math_symbol(toks[t].second)) {
                ++t;
                continue;
            }
            size_t lo = t, hi = t;
            while (lo > 0 && token_extendable(toks[lo - 1].second)) --lo;
            while (hi + 1 < toks.size() && token_extendable(toks[hi + 1].second)) ++hi;
            size_t begin = line_start + toks[lo].first;
            size_t end = line_start + toks[hi].first + toks[hi].second.size();
            push_region(out, MathForm::unicode_math, begin, end,
                        text.substr(begin, end - begin), false);
            t = hi + 1;
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    return out;
}

std::vector<MathRegion> merge_regions(const std::vector<std::vector<MathRegion>>& groups) {
    struct Entry {
        MathRegion r;
        size_t priority;
    };
    std::vector<Entry> all;
    for (size_t g = 0; g < groups.size(); ++g)
        for (const auto& r : groups[g]) all.push_back(Entry{r, g});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) {
        if (a.r.begin != b.r.begin) return a.r.begin < b.r.begin;
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.r.end > b.r.end;
    });
    std::vector<MathRegion> out;
    size_t last_end = 0;
    for (auto& e : all) {
        if (!out.empty() && e.r.begin < last_end) continue;
        last_end = e.r.end;
        out.push_back(std::move(e.r));
    }
    return out;
}

}  // namespace mathcrawl::render
