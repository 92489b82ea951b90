#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "steglab/image.hpp"

namespace steglab {

/// Per-image evaluation record.
struct StegoReport {
    std::string id;
    double decoded_rate = 0.0;
    double cover_changing_rate = 0.0;
    double capacity_bpp = 0.0;
    std::map<std::string, double> detector_scores;
};

/// 1 - mean |H - D| over all positions and channels of two [0,1] images.
double decoded_rate(const ImageTensor& hidden, const ImageTensor& decoded);

/// mean |C - E| over all positions and channels of two [0,1] images.
double cover_changing_rate(const ImageTensor& cover, const ImageTensor& embedded);

/// Payload capacity in bits per pixel: decoded rate x 8 bits x 3 channels.
double capacity_bpp(double rate);

/// |I1 - I2| normalized by its maximum; all zeros when the images are equal.
ImageTensor residual(const ImageTensor& a, const ImageTensor& b);

/// clip(I * magnification, 0, 1).
ImageTensor enhance(const ImageTensor& img, double magnification);

/// Per-channel histogram with bin edges [i/bins, (i+1)/bins), last bin closed.
std::vector<std::vector<int64_t>> histogram(const ImageTensor& img, int bins = 256);

/// 1 - sum(min(h1,h2))/pixels, aggregated over the three channels; 0 for
/// identical histograms, approaching 1 for disjoint ones.
double histogram_intersection_distance(const std::vector<std::vector<int64_t>>& h1,
                                       const std::vector<std::vector<int64_t>>& h2);

/// CSV with one row per report: id, decoded_rate, cover_changing_rate,
/// capacity_bpp, then one column per detector (union of names, sorted).
std::string reports_to_csv(const std::vector<StegoReport>& reports);

}  // namespace steglab
