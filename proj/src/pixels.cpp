#include "scalematch/pixels.hpp"

#include <atomic>
#include <filesystem>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "scalematch/errors.hpp"

namespace scalematch {

namespace fs = std::filesystem;

namespace {
std::atomic<unsigned> g_img_tmp_counter{0};
}

cv::Mat load_image(const std::string& path) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_COLOR);
  if (mat.empty()) throw MissingImageFile("cannot read image " + path);
  return mat;
}

void save_image_atomic(const std::string& path, const cv::Mat& image) {
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  // imwrite picks the codec from the extension, so the temp name keeps it
  const std::string tmp = path + ".tmp" + std::to_string(g_img_tmp_counter.fetch_add(1)) +
                          target.extension().string();
  if (!cv::imwrite(tmp, image)) throw IoError("cannot write image " + tmp);
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("rename failed for " + path + ": " + ec.message());
  }
}

cv::Mat resize_image(const cv::Mat& image, int out_w, int out_h, bool bilinear) {
  cv::Mat out;
  cv::resize(image, out, cv::Size(out_w, out_h), 0, 0,
             bilinear ? cv::INTER_LINEAR : cv::INTER_NEAREST);
  return out;
}

}  // namespace scalematch
