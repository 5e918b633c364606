// Pools eGUE spectra in the canonical domain and prints the histogram next to the
// semicircle of radius 2 sqrt(Lambda0).

#include <cstdio>

#include <embrmt/spectral.hpp>

int main() {
    embrmt::EnsembleParams p;
    p.l = 10;
    p.m = 3;
    p.k = 2;
    auto h = embrmt::empirical_density(p, 40, 24, 7);
    std::printf("radius %.4f, %zu eigenvalues, L1 distance %.4f\n", h.radius, h.eigenvalues, h.l1_distance());
    for (std::size_t b = 0; b < h.bins(); ++b) {
        std::printf("%9.3f  %.5f  %.5f  ", 0.5 * (h.edges[b] + h.edges[b + 1]), h.heights[b], h.overlay[b]);
        for (int i = 0; i < static_cast<int>(h.heights[b] * h.radius * 40); ++i) std::putchar('#');
        std::putchar('\n');
    }
}
