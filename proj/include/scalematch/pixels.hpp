#pragma once

#include <string>

#include <opencv2/core.hpp>

namespace scalematch {

/// Loads an image as 8-bit BGR. Throws MissingImageFile when absent/unreadable.
cv::Mat load_image(const std::string& path);

/// Encodes by extension (temp file + rename).
void save_image_atomic(const std::string& path, const cv::Mat& image);

/// Resizes to exactly (out_w, out_h); bilinear or nearest-neighbor.
cv::Mat resize_image(const cv::Mat& image, int out_w, int out_h, bool bilinear);

}  // namespace scalematch
