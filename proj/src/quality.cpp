#include "rlab/quality.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>

namespace rlab {

namespace {

// Reads one PGM header token, skipping whitespace and # comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

int pgm_int(std::istream& in, const std::string& path, const char* what) {
  std::string tok = pgm_token(in);
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(path + ": bad PGM " + what + " field '" + tok + "'");
  }
  return std::stoi(tok);
}

void check_dims(const GrayImage& img) {
  if (img.width < 3 || img.height < 3) {
    throw Error("image too small for clarity analysis (need at least 3x3, got " +
                std::to_string(img.width) + "x" + std::to_string(img.height) + ")");
  }
}

}  // namespace

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open image: " + path);
  std::string magic = pgm_token(in);
  if (magic != "P5") throw Error(path + ": not a binary PGM (P5) file, magic '" + magic + "'");
  GrayImage img;
  img.width = pgm_int(in, path, "width");
  img.height = pgm_int(in, path, "height");
  int maxval = pgm_int(in, path, "maxval");
  if (img.width <= 0 || img.height <= 0) throw Error(path + ": non-positive dimensions");
  if (maxval <= 0 || maxval > 255) throw Error(path + ": unsupported maxval " + std::to_string(maxval));
  size_t n = static_cast<size_t>(img.width) * img.height;
  std::vector<unsigned char> raw(n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) throw Error(path + ": truncated pixel data");
  img.pixels.resize(n);
  for (size_t i = 0; i < n; ++i) img.pixels[i] = raw[i] / static_cast<double>(maxval);
  return img;
}

void save_pgm(const GrayImage& img, const std::string& path) {
  if (img.width <= 0 || img.height <= 0 ||
      img.pixels.size() != static_cast<size_t>(img.width) * img.height) {
    throw Error("malformed image, refusing to save: " + path);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write image: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (double p : img.pixels) {
    double clamped = std::clamp(p, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(clamped * 255.0 + 0.5)));
  }
  if (!out) throw Error("write failure: " + path);
}

double laplacian_variance(const GrayImage& img) {
  check_dims(img);
  // Interior response: up + down + left + right - 4*center.
  std::vector<double> resp;
  resp.reserve(static_cast<size_t>(img.width - 2) * (img.height - 2));
  for (int y = 1; y + 1 < img.height; ++y) {
    for (int x = 1; x + 1 < img.width; ++x) {
      double v = img.at(x, y - 1) + img.at(x, y + 1) + img.at(x - 1, y) + img.at(x + 1, y) -
                 4.0 * img.at(x, y);
      resp.push_back(v);
    }
  }
  double mean = 0.0;
  for (double v : resp) mean += v;
  mean /= static_cast<double>(resp.size());
  double var = 0.0;
  for (double v : resp) var += (v - mean) * (v - mean);
  return var / static_cast<double>(resp.size());
}

double image_clarity(const GrayImage& img, const ClarityParams& params) {
  double var = laplacian_variance(img);
  double squashed = var / (var + params.squash_c);
  double res_factor =
      std::min(1.0, static_cast<double>(std::min(img.width, img.height)) / params.min_resolution);
  return squashed * res_factor;
}

GrayImage box_blur3(const GrayImage& img) {
  check_dims(img);
  GrayImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(img.pixels.size());
  auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi); };
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          acc += img.at(clampi(x + dx, img.width - 1), clampi(y + dy, img.height - 1));
        }
      }
      out.at(x, y) = acc / 9.0;
    }
  }
  return out;
}

VisionAssessment assess_vision(const Sample& s, const JudgeBackend& judge,
                               const std::string& base_dir, const ClarityParams& params) {
  VisionAssessment va;
  if (s.image_ref) {
    std::filesystem::path p(*s.image_ref);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    if (std::filesystem::exists(p)) {
      va.clarity = image_clarity(load_pgm(p.string()), params);
    } else {
      throw Error("image not found: " + p.string() + " (sample " + s.id + ")");
    }
  }
  JudgeRequest req;
  req.kind = JudgeTask::Necessity;
  req.question = s.question;
  if (s.image_ref) req.image_desc = *s.image_ref;
  auto it = s.meta.find("caption");
  if (it != s.meta.end()) req.image_desc = it->second;
  JudgeVerdict v = judge_call(req, judge);
  va.necessity = v.scores.at("necessity");
  va.s_v = (5.0 * va.clarity + va.necessity) / 2.0;
  return va;
}

TextAssessment assess_text(const Sample& s, const JudgeBackend& judge) {
  if (s.question.empty()) throw Error("sample " + s.id + " has an empty question");
  JudgeRequest req;
  req.kind = JudgeTask::TextProperties;
  req.question = s.question;
  JudgeVerdict v = judge_call(req, judge);
  TextAssessment ta;
  ta.question_quality = v.scores.at("question_quality");
  ta.difficulty = v.scores.at("difficulty");
  ta.reasoning_demand = v.scores.at("reasoning_demand");
  ta.s_t = (ta.question_quality + ta.difficulty + ta.reasoning_demand) / 3.0;
  return ta;
}

}  // namespace rlab
