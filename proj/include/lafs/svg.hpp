#pragma once

#include <string>
#include <vector>

#include "lafs/geometry.hpp"

namespace lafs {

// Box-overlay SVG: one <g> per input set with a distinct stroke class, one
// <polygon> per box. Dependency-free and diffable.
inline std::string render_svg(const std::vector<std::vector<RotatedBox>>& sets,
                              int width, int height) {
    static const char* kColors[] = {"#e41a1c", "#377eb8", "#4daf4a",
                                    "#984ea3", "#ff7f00", "#f781bf"};
    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
        std::to_string(width) + "\" height=\"" + std::to_string(height) +
        "\" viewBox=\"0 0 " + std::to_string(width) + " " +
        std::to_string(height) + "\">\n";
    for (std::size_t s = 0; s < sets.size(); ++s) {
        const char* color = kColors[s % (sizeof(kColors) / sizeof(*kColors))];
        svg += "  <g class=\"boxes-" + std::to_string(s) + "\" fill=\"none\" stroke=\"" +
               color + "\" stroke-width=\"1.5\">\n";
        for (const RotatedBox& box : sets[s]) {
            svg += "    <polygon points=\"";
            const Quad q = box.quad();
            for (int i = 0; i < 4; ++i) {
                if (i) svg += " ";
                svg += std::to_string(q[i].x) + "," + std::to_string(q[i].y);
            }
            svg += "\"/>\n";
        }
        svg += "  </g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace lafs
