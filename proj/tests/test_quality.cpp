#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rlab/jsonl.hpp"
#include "rlab/judge.hpp"
#include "rlab/quality.hpp"
#include "rlab/rng.hpp"

using namespace rlab;
namespace fs = std::filesystem;

static GrayImage checkerboard(int w, int h) {
  GrayImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = ((x + y) % 2 == 0) ? 1.0 : 0.0;
  return img;
}

static GrayImage constant(int w, int h, double v) {
  GrayImage img;
  img.width = w;
  img.height = h;
  img.pixels.assign(static_cast<size_t>(w) * h, v);
  return img;
}

TEST_CASE("pgm round-trip preserves pixels") {
  GrayImage img = checkerboard(9, 7);
  fs::path p = fs::temp_directory_path() / "rlab_roundtrip.pgm";
  save_pgm(img, p.string());
  GrayImage back = load_pgm(p.string());
  REQUIRE(back.width == 9);
  REQUIRE(back.height == 7);
  for (size_t i = 0; i < img.pixels.size(); ++i) CHECK(back.pixels[i] == doctest::Approx(img.pixels[i]));
  fs::remove(p);
}

TEST_CASE("pgm parser handles comments and rejects damage") {
  fs::path dir = fs::temp_directory_path();
  fs::path ok = dir / "rlab_ok.pgm";
  {
    std::ofstream f(ok, std::ios::binary);
    f << "P5\n# a comment\n2 2\n# another\n255\n";
    f.write("\x00\x7f\xff\x40", 4);
  }
  GrayImage img = load_pgm(ok.string());
  CHECK(img.width == 2);
  CHECK(img.at(1, 0) == doctest::Approx(127.0 / 255.0));
  fs::remove(ok);

  fs::path p2 = dir / "rlab_p2.pgm";
  { std::ofstream f(p2, std::ios::binary); f << "P2\n2 2\n255\n0 0 0 0\n"; }
  CHECK_THROWS_AS(load_pgm(p2.string()), Error);
  fs::remove(p2);

  fs::path trunc = dir / "rlab_trunc.pgm";
  {
    std::ofstream f(trunc, std::ios::binary);
    f << "P5\n4 4\n255\n";
    f.write("\x01\x02", 2);
  }
  CHECK_THROWS_AS(load_pgm(trunc.string()), Error);
  fs::remove(trunc);

  CHECK_THROWS_AS(load_pgm("/nonexistent/img.pgm"), Error);
}

TEST_CASE("laplacian variance: flat zero, ramp zero, checker exactly 16") {
  CHECK(laplacian_variance(constant(8, 8, 0.3)) == doctest::Approx(0.0));

  GrayImage ramp;
  ramp.width = ramp.height = 16;
  ramp.pixels.resize(256);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) ramp.at(x, y) = x / 15.0;
  CHECK(laplacian_variance(ramp) == doctest::Approx(0.0));

  CHECK(laplacian_variance(checkerboard(32, 32)) == doctest::Approx(16.0).epsilon(1e-12));

  GrayImage tiny = constant(2, 2, 0.0);
  CHECK_THROWS_AS(laplacian_variance(tiny), Error);
}

TEST_CASE("clarity: sharp near 1, flat 0, small images discounted") {
  CHECK(image_clarity(checkerboard(64, 64)) > 0.9);
  CHECK(image_clarity(constant(64, 64, 0.5)) == doctest::Approx(0.0));
  double full = image_clarity(checkerboard(64, 64));
  double small = image_clarity(checkerboard(16, 16));
  CHECK(small == doctest::Approx(full * 16.0 / 32.0).epsilon(1e-6));
}

TEST_CASE("blurring never raises clarity") {
  Rng r(99);
  for (int trial = 0; trial < 5; ++trial) {
    GrayImage img;
    img.width = img.height = 40;
    img.pixels.resize(1600);
    for (auto& p : img.pixels) p = r.uniform();
    double before = image_clarity(img);
    GrayImage blurred = box_blur3(img);
    double after = image_clarity(blurred);
    CHECK(after <= before + 1e-12);
    CHECK(image_clarity(box_blur3(blurred)) <= after + 1e-12);
  }
}

TEST_CASE("bundled fixture images have the intended clarity profile") {
  fs::path img = fs::path(RLAB_REPO_DIR) / "data" / "fixtures" / "img";
  CHECK(image_clarity(load_pgm((img / "checkerboard.pgm").string())) > 0.9);
  CHECK(image_clarity(load_pgm((img / "noise.pgm").string())) > 0.5);
  CHECK(image_clarity(load_pgm((img / "flat.pgm").string())) == doctest::Approx(0.0));
  CHECK(image_clarity(load_pgm((img / "ramp.pgm").string())) < 0.05);
}

namespace {

// Records requests; returns a fixed score for every criterion.
struct FixedJudge : JudgeBackend {
  int value;
  mutable std::vector<JudgeRequest> seen;
  explicit FixedJudge(int v) : value(v) {}
  JudgeVerdict call(const JudgeRequest& req) const override {
    seen.push_back(req);
    JudgeVerdict v;
    switch (req.kind) {
      case JudgeTask::TextProperties:
        v.scores["question_quality"] = value;
        v.scores["difficulty"] = value;
        v.scores["reasoning_demand"] = value;
        break;
      case JudgeTask::Necessity:
        v.scores["necessity"] = value;
        break;
      case JudgeTask::Integration:
        v.scores["integration"] = value;
        break;
      default:
        break;
    }
    return v;
  }
};

}  // namespace

TEST_CASE("assess_vision combines clarity and necessity") {
  FixedJudge judge(4);
  Sample s;
  s.id = "v1";
  s.question = "How many squares are in the picture?";

  SUBCASE("no image means zero clarity") {
    VisionAssessment v = assess_vision(s, judge);
    CHECK(v.clarity == doctest::Approx(0.0));
    CHECK(v.necessity == 4);
    CHECK(v.s_v == doctest::Approx(2.0));  // (5*0 + 4)/2
  }

  SUBCASE("image clarity feeds the aggregate") {
    fs::path dir = fs::temp_directory_path() / "rlab_vision";
    fs::create_directories(dir);
    save_pgm(checkerboard(64, 64), (dir / "sharp.pgm").string());
    s.image_ref = "sharp.pgm";
    VisionAssessment v = assess_vision(s, judge, dir.string());
    CHECK(v.clarity > 0.9);
    CHECK(v.s_v == doctest::Approx((5.0 * v.clarity + 4) / 2));
    fs::remove_all(dir);
  }

  SUBCASE("missing image file throws") {
    s.image_ref = "gone.pgm";
    CHECK_THROWS_AS(assess_vision(s, judge, "/nonexistent"), Error);
  }

  SUBCASE("caption metadata reaches the judge as the image description") {
    s.meta["caption"] = "three stacked cubes";
    assess_vision(s, judge);
    REQUIRE_FALSE(judge.seen.empty());
    CHECK(judge.seen.back().image_desc == "three stacked cubes");
  }
}

TEST_CASE("assess_text averages the three criteria") {
  FixedJudge judge(3);
  Sample s;
  s.id = "t1";
  s.question = "Why is the sum even?";
  TextAssessment t = assess_text(s, judge);
  CHECK(t.question_quality == 3);
  CHECK(t.difficulty == 3);
  CHECK(t.reasoning_demand == 3);
  CHECK(t.s_t == doctest::Approx(3.0));

  Sample empty;
  empty.id = "t2";
  CHECK_THROWS_AS(assess_text(empty, judge), Error);
}
