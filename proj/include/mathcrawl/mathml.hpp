#pragma once

#include <string>
#include <string_view>

namespace mathcrawl::render {

struct MathmlResult {
    std::string tex;
    bool display = false;      // display="block" on the <math> element
    bool had_unknown = false;  // unknown elements fell back to text content
};

// Presentation-MathML core (mi, mo, mn, mrow, msup, msub, msubsup, mfrac,
// msqrt, mroot, mtable, mover, munder, mfenced, mtext) to TeX. A TeX
// <annotation> inside <semantics> wins when present. Unknown elements
// fall back to concatenated text content and set had_unknown.
MathmlResult mathml_to_tex(std::string_view inner_mathml,
                           std::string_view math_attrs = {});

}  // namespace mathcrawl::render
