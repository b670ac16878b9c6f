#pragma once

#include <string>
#include <vector>

#include "rlab/core.hpp"
#include "rlab/judge.hpp"

// Quality/difficulty assessment: a local Laplacian-variance clarity metric
// over grayscale images plus judge-scored necessity and text criteria,
// aggregated into the vision score s_v and text score s_t.

namespace rlab {

// Row-major luminance values in [0,1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  double at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
};

// Binary 8-bit PGM (P5) only; other formats must be pre-converted.
GrayImage load_pgm(const std::string& path);
void save_pgm(const GrayImage& img, const std::string& path);

struct ClarityParams {
  double squash_c = 0.01;   // variance scale at which clarity reaches 0.5
  int min_resolution = 32;  // below this, clarity is discounted linearly
};

// Variance of the 3x3 Laplacian [[0,1,0],[1,-4,1],[0,1,0]] over interior
// pixels. Throws for images smaller than 3x3.
double laplacian_variance(const GrayImage& img);

// squash(laplacian_variance) * resolution factor, in [0,1].
double image_clarity(const GrayImage& img, const ClarityParams& params = {});

// 3x3 box blur with clamped borders. Public because the clarity metric's
// blur-monotonicity property is tested against it.
GrayImage box_blur3(const GrayImage& img);

struct VisionAssessment {
  double clarity = 0.0;
  int necessity = 0;
  double s_v = 0.0;
};

struct TextAssessment {
  int question_quality = 0;
  int difficulty = 0;
  int reasoning_demand = 0;
  double s_t = 0.0;
};

// Clarity from the referenced image (resolved against base_dir; absent
// image_ref scores clarity 0, unreadable file throws), necessity from the
// judge. s_v = (5*clarity + necessity)/2.
VisionAssessment assess_vision(const Sample& s, const JudgeBackend& judge,
                               const std::string& base_dir = ".",
                               const ClarityParams& params = {});

// Three judge criteria; s_t is their mean.
TextAssessment assess_text(const Sample& s, const JudgeBackend& judge);

}  // namespace rlab
