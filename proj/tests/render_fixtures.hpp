#pragma once

#include <string>
#include <vector>

// Golden renderer fixtures: hand-derived expected outputs, byte-exact.
// Shared by the unit suite and the acceptance suite.
namespace render_fixtures {

struct Fixture {
    const char* name;
    std::string html;
    std::string golden;
    int line_width = 120;
};

inline std::vector<Fixture> all() {
    std::vector<Fixture> f;

    f.push_back({"pre_verbatim",
                 "<pre>def f():\n  return 1</pre>",
                 "def f():\n  return 1"});

    f.push_back({"mathml_inline",
                 "<p>Consider <math><mi>x</mi><mo>+</mo><mn>1</mn></math> now.</p>",
                 "Consider x + 1 now."});

    f.push_back({"nav_and_footer",
                 "<body><nav><a href=\"/\">Home</a> <a href=\"/about\">About</a></nav>"
                 "<footer>Copyright 2024 Example Inc</footer></body>",
                 "Home About\n\nCopyright 2024 Example Inc"});

    f.push_back({"paragraphs_inline_tags",
                 "<p>Hello <b>world</b>!</p><p>Bye</p>",
                 "Hello world!\n\nBye"});

    f.push_back({"unordered_list",
                 "<ul><li>alpha</li><li>beta</li></ul>",
                 "   * alpha\n   * beta"});

    f.push_back({"ordered_list",
                 "<ol><li>first</li><li>second</li></ol>",
                 "   1. first\n   2. second"});

    f.push_back({"nested_list",
                 "<ul><li>a<ul><li>b</li></ul></li></ul>",
                 "   * a\n      * b"});

    f.push_back({"table_rows",
                 "<table><tr><td>a</td><td>b</td></tr><tr><td>c</td><td>d</td></tr></table>",
                 "a | b\nc | d"});

    f.push_back({"heading_paragraph",
                 "<h1>Title</h1><p>Body</p>",
                 "# Title\n\nBody"});

    f.push_back({"script_tex_inline",
                 "<p>Euler: <script type=\"math/tex\">e^{i\\pi}+1=0</script></p>",
                 "Euler: e^{i\\pi}+1=0"});

    f.push_back({"script_tex_display",
                 "<script type=\"math/tex; mode=display\">\\int_0^1 x dx</script>",
                 "\\int_0^1 x dx"});

    f.push_back({"head_style_script_comment_dropped",
                 "<head><title>T</title><style>p{color:red}</style></head>"
                 "<body><p>visible</p><script>var x=1;</script><!-- note --></body>",
                 "visible"});

    f.push_back({"img_alt_tex",
                 "<p>Formula: <img src=\"eq.png\" alt=\"\\frac{a}{b}\"> here</p>",
                 "Formula: \\frac{a}{b} here"});

    f.push_back({"img_alt_plain",
                 "<p>See <img src=\"tri.png\" alt=\"diagram of a triangle\"> above</p>",
                 "See [diagram of a triangle] above"});

    f.push_back({"img_no_alt",
                 "<p>Photo: <img src=\"/imgs/photo.jpg\"></p>",
                 "Photo: [photo.jpg]"});

    f.push_back({"entities",
                 "<p>&lt;x&gt; &amp; y &le; 2&sup2;</p>",
                 "<x> & y \xE2\x89\xA4 2\xC2\xB2"});

    f.push_back({"anchor_text",
                 "<p>Go to <a href=\"/page\">the page</a> now.</p>",
                 "Go to the page now."});

    f.push_back({"line_break",
                 "<p>line one<br>line two</p>",
                 "line one\nline two"});

    f.push_back({"wrapping_width_20",
                 "<p>aaaa bbbb cccc dddd eeee</p>",
                 "aaaa bbbb cccc dddd\neeee",
                 20});

    f.push_back({"currency_and_inline_math",
                 "<p>price is $5 and $x+1$ holds</p>",
                 "price is $5 and $x+1$ holds"});

    f.push_back({"inline_code_keeps_bytes",
                 "<p>use <code>x &amp; y</code> now</p>",
                 "use x &amp; y now"});

    f.push_back({"mathml_display_block",
                 "<math display=\"block\"><mfrac><mi>a</mi><mi>b</mi></mfrac></math>",
                 "\\frac{a}{b}"});

    f.push_back({"unclosed_paragraphs",
                 "<p>one<p>two",
                 "one\n\ntwo"});

    f.push_back({"pre_long_line_not_wrapped",
                 "<pre>" + std::string(200, 'x') + "</pre>",
                 std::string(200, 'x')});

    f.push_back({"tex_delimiters_pass_through",
                 "<p>\\(a\\)\\[b\\]</p>",
                 "\\(a\\)\\[b\\]"});

    f.push_back({"horizontal_rule",
                 "<p>a</p><hr><p>b</p>",
                 "a\n\n" + std::string(40, '-') + "\n\nb"});

    f.push_back({"pre_with_code_markup",
                 "<pre><code>for i in range(3):\n    print(i)</code></pre>",
                 "for i in range(3):\n    print(i)"});

    // conduction-page sample: shortcode payloads must survive byte-exact
    f.push_back(
        {"conduction_page",
         "<html><head><title>14.5 Conduction</title></head><body>\n"
         "<h3>Example 1: Calculating Heat Transfer Through Conduction: Conduction Rate "
         "Through an Ice Box</h3>\n"
         "<p><b>Strategy</b></p>\n"
         "<p>The rate of heat transfer by conduction is</p>\n"
         "<p>[latex]\\frac{Q}{t} = \\frac{kA(T_2-T_1)}{d}[/latex]</p>\n"
         "<p>The heat is used to melt the ice:</p>\n"
         "<p>[latex]\\boldsymbol{=}[/latex]</p>\n"
         "<p>Insert the known values:</p>\n"
         "<p>[latex]\\boldsymbol{=\\:13.3\\textbf{ J/s}}.[/latex]</p>\n"
         "<p>Solve for the mass:</p>\n"
         "<p>[latex size=\"2\"]\\boldsymbol{\\frac{Q}{L_{\\textbf{f}}}}[/latex]</p>\n"
         "<p>[latex size=\"2\"]\\boldsymbol{\\frac{1.15\\times10^6\\textbf{ J}}"
         "{334\\times10^3\\textbf{ J/kg}}}[/latex]</p>\n"
         "<table><tr><td>Substance</td><td>Thermal conductivity k (J/s.m.C)</td></tr>\n"
         "<tr><td>Silver</td><td>420</td></tr>\n"
         "<tr><td>Styrofoam</td><td>0.010</td></tr></table>\n"
         "</body></html>",
         "### Example 1: Calculating Heat Transfer Through Conduction: Conduction Rate "
         "Through an Ice Box\n\n"
         "Strategy\n\n"
         "The rate of heat transfer by conduction is\n\n"
         "[latex]\\frac{Q}{t} = \\frac{kA(T_2-T_1)}{d}[/latex]\n\n"
         "The heat is used to melt the ice:\n\n"
         "[latex]\\boldsymbol{=}[/latex]\n\n"
         "Insert the known values:\n\n"
         "[latex]\\boldsymbol{=\\:13.3\\textbf{ J/s}}.[/latex]\n\n"
         "Solve for the mass:\n\n"
         "[latex size=\"2\"]\\boldsymbol{\\frac{Q}{L_{\\textbf{f}}}}[/latex]\n\n"
         "[latex size=\"2\"]\\boldsymbol{\\frac{1.15\\times10^6\\textbf{ J}}"
         "{334\\times10^3\\textbf{ J/kg}}}[/latex]\n\n"
         "Substance | Thermal conductivity k (J/s.m.C)\n"
         "Silver | 420\n"
         "Styrofoam | 0.010"});

    return f;
}

// Shortcode payloads of the conduction fixture, in order.
inline std::vector<std::string> conduction_payloads() {
    return {
        "\\frac{Q}{t} = \\frac{kA(T_2-T_1)}{d}",
        "\\boldsymbol{=}",
        "\\boldsymbol{=\\:13.3\\textbf{ J/s}}.",
        "\\boldsymbol{\\frac{Q}{L_{\\textbf{f}}}}",
        "\\boldsymbol{\\frac{1.15\\times10^6\\textbf{ J}}{334\\times10^3\\textbf{ J/kg}}}",
    };
}

}  // namespace render_fixtures
