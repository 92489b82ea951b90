#include "steglab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace steglab {

namespace {

void check_same_shape(const ImageTensor& a, const ImageTensor& b, const char* who) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(who) + ": image sizes differ");
    if (a.data.empty()) throw std::invalid_argument(std::string(who) + ": empty image");
}

double mean_abs_difference(const ImageTensor& a, const ImageTensor& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) acc += std::fabs(a.data[i] - b.data[i]);
    return acc / static_cast<double>(a.data.size());
}

}  // namespace

double decoded_rate(const ImageTensor& hidden, const ImageTensor& decoded) {
    check_same_shape(hidden, decoded, "decoded_rate");
    return 1.0 - mean_abs_difference(hidden, decoded);
}

double cover_changing_rate(const ImageTensor& cover, const ImageTensor& embedded) {
    check_same_shape(cover, embedded, "cover_changing_rate");
    return mean_abs_difference(cover, embedded);
}

double capacity_bpp(double rate) {
    if (rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("capacity_bpp: rate must lie in [0,1]");
    return rate * 8.0 * 3.0;
}

ImageTensor residual(const ImageTensor& a, const ImageTensor& b) {
    check_same_shape(a, b, "residual");
    ImageTensor out(a.h, a.w);
    float max_diff = 0.0f;
    for (size_t i = 0; i < a.data.size(); ++i) {
        out.data[i] = std::fabs(a.data[i] - b.data[i]);
        max_diff = std::max(max_diff, out.data[i]);
    }
    if (max_diff == 0.0f) return out;  // identical images: all-zero residual
    for (auto& v : out.data) v /= max_diff;
    return out;
}

ImageTensor enhance(const ImageTensor& img, double magnification) {
    if (magnification <= 0.0) throw std::invalid_argument("enhance: magnification must be positive");
    ImageTensor out(img.h, img.w);
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = std::clamp(static_cast<float>(img.data[i] * magnification), 0.0f, 1.0f);
    return out;
}

std::vector<std::vector<int64_t>> histogram(const ImageTensor& img, int bins) {
    if (bins < 2) throw std::invalid_argument("histogram: need at least 2 bins");
    std::vector<std::vector<int64_t>> counts(3, std::vector<int64_t>(bins, 0));
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < img.h; ++y)
            for (int x = 0; x < img.w; ++x) {
                int bin = static_cast<int>(img.at(c, y, x) * bins);
                counts[c][std::min(bin, bins - 1)] += 1;  // value 1.0 falls in the last bin
            }
    return counts;
}

double histogram_intersection_distance(const std::vector<std::vector<int64_t>>& h1,
                                       const std::vector<std::vector<int64_t>>& h2) {
    if (h1.size() != h2.size()) throw std::invalid_argument("histogram sizes differ");
    int64_t total = 0, overlap = 0;
    for (size_t c = 0; c < h1.size(); ++c) {
        if (h1[c].size() != h2[c].size()) throw std::invalid_argument("histogram bins differ");
        for (size_t i = 0; i < h1[c].size(); ++i) {
            total += h1[c][i];
            overlap += std::min(h1[c][i], h2[c][i]);
        }
    }
    if (total == 0) throw std::invalid_argument("histogram_intersection_distance: empty histograms");
    return 1.0 - static_cast<double>(overlap) / static_cast<double>(total);
}

std::string reports_to_csv(const std::vector<StegoReport>& reports) {
    std::set<std::string> detectors;
    for (const auto& r : reports)
        for (const auto& [name, score] : r.detector_scores) detectors.insert(name);

    std::ostringstream os;
    os << "id,decoded_rate,cover_changing_rate,capacity_bpp";
    for (const auto& d : detectors) os << "," << d;
    os << "\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        os << "," << buf;
    };
    for (const auto& r : reports) {
        os << r.id;
        put(r.decoded_rate);
        put(r.cover_changing_rate);
        put(r.capacity_bpp);
        for (const auto& d : detectors) {
            auto it = r.detector_scores.find(d);
            if (it == r.detector_scores.end())
                os << ",";
            else
                put(it->second);
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace steglab
