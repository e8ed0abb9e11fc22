/* Copyright 2026 The Cola Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <doctest.h>

#include <sstream>

#include "cola/error.hpp"
#include "cola/frame.hpp"
#include "cola/image_io.hpp"
#include "support.hpp"

using namespace cola;
using cola::test::TempDir;

namespace {

// Hand-built framestream bytes: header line then raw RGB24.
std::string hand_stream(int w, int h, long fps_milli, long count, int frames, int truncate_last = 0) {
  std::string s = "FRAMESTREAM 1 " + std::to_string(w) + " " + std::to_string(h) + " " +
                  std::to_string(fps_milli) + " " + std::to_string(count) + "\n";
  for (int f = 0; f < frames; ++f) {
    std::string px(static_cast<std::size_t>(w * h * 3), '\0');
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<char>((f * 31 + i) & 0xff);
    const bool cut = f == frames - 1 && truncate_last > 0;
    s.append(px, 0, cut ? px.size() - static_cast<std::size_t>(truncate_last) : px.size());
  }
  return s;
}

std::unique_ptr<FrameStream> open_fs(const std::string& path, std::optional<double> fps = {}) {
  FrameSource src = infer_frame_source(path);
  src.fps_hint = fps;
  return open_frame_source(src);
}

}  // namespace

TEST_SUITE("frame-ingest") {
  TEST_CASE("hand-built framestream declaring 3 frames of 8x8 yields exactly those frames") {
    TempDir dir;
    const auto bytes = hand_stream(8, 8, 25000, 3, 3);
    test::write_file(dir / "a.fs", bytes);
    auto s = open_fs(dir / "a.fs");
    const auto frames = read_all_frames(*s);
    REQUIRE(frames.size() == 3);
    const std::size_t header = bytes.find('\n') + 1;
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(frames[k].width == 8);
      CHECK(frames[k].height == 8);
      CHECK(frames[k].index == static_cast<std::int64_t>(k));
      const std::string raw(frames[k].pixels.begin(), frames[k].pixels.end());
      CHECK(raw == bytes.substr(header + k * 192, 192));
    }
    CHECK(frames[1].timestamp_ms == 40);
  }

  TEST_CASE("writer output parses back to the same frames") {
    TempDir dir;
    std::mt19937_64 rng(7);
    std::vector<Frame> frames;
    for (int k = 0; k < 4; ++k) frames.push_back(test::random_frame(rng, 5, 3, k));
    for (bool declare : {true, false}) {
      write_framestream_file(dir / "rt.fs", frames, 10000, declare);
      auto s = open_fs(dir / "rt.fs");
      auto back = read_all_frames(*s);
      REQUIRE(back.size() == frames.size());
      for (std::size_t k = 0; k < frames.size(); ++k) {
        CHECK(back[k].pixels == frames[k].pixels);
        CHECK(back[k].timestamp_ms == static_cast<std::int64_t>(k) * 100);
      }
    }
  }

  TEST_CASE("truncated payload names expected and received byte counts") {
    TempDir dir;
    test::write_file(dir / "t.fs", hand_stream(4, 4, 0, 2, 2, 10));
    auto s = open_fs(dir / "t.fs");
    CHECK(s->next().has_value());
    try {
      s->next();
      FAIL("expected a truncation error");
    } catch (const FormatError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("expected 48 bytes") != std::string::npos);
      CHECK(msg.find("received 38") != std::string::npos);
    }
  }

  TEST_CASE("count mismatch is an error, unknown count ends at EOF") {
    TempDir dir;
    test::write_file(dir / "short.fs", hand_stream(2, 2, 0, 3, 2));
    auto s = open_fs(dir / "short.fs");
    CHECK(s->next());
    CHECK(s->next());
    CHECK_THROWS_AS(s->next(), FormatError);

    test::write_file(dir / "open.fs", hand_stream(2, 2, 0, -1, 5));
    auto open = open_fs(dir / "open.fs");
    CHECK(read_all_frames(*open).size() == 5);
  }

  TEST_CASE("end of stream is sticky") {
    TempDir dir;
    test::write_file(dir / "one.fs", hand_stream(2, 2, 0, 1, 1));
    auto s = open_fs(dir / "one.fs");
    auto f = next_frame(*s);
    REQUIRE(f);
    CHECK(f->index == 0);
    CHECK_FALSE(next_frame(*s));
    CHECK_FALSE(next_frame(*s));
  }

  TEST_CASE("fps hint drives synthesized timestamps") {
    TempDir dir;
    test::write_file(dir / "nofps.fs", hand_stream(2, 2, 0, 4, 4));
    auto s = open_fs(dir / "nofps.fs", 10.0);
    const auto frames = read_all_frames(*s);
    for (std::size_t k = 0; k < frames.size(); ++k) CHECK(frames[k].timestamp_ms == static_cast<std::int64_t>(k * 100));
    CHECK(synth_timestamp_ms(3, 30.0) == 100);
    CHECK(synth_timestamp_ms(1, 3.0) == 333);
    auto d = open_fs(dir / "nofps.fs");
    d->next();
    CHECK(d->next()->timestamp_ms == 40);
  }

  TEST_CASE("malformed headers are rejected") {
    CHECK_THROWS_AS(parse_framestream_header("FRAMESTREAM 2 8 8 0 1"), FormatError);
    CHECK_THROWS_AS(parse_framestream_header("FRAMESTREEM 1 8 8 0 1"), FormatError);
    CHECK_THROWS_AS(parse_framestream_header("FRAMESTREAM 1 8 8 0"), FormatError);
    CHECK_THROWS_AS(parse_framestream_header("FRAMESTREAM 1 0 8 0 1"), FormatError);
    CHECK_THROWS_AS(parse_framestream_header("FRAMESTREAM 1 5000 8 0 1"), FormatError);
    CHECK_THROWS_AS(parse_framestream_header("FRAMESTREAM 1 8 8 0 -2"), FormatError);
    CHECK_THROWS_AS(parse_framestream_header("FRAMESTREAM 1 8 8 0 1 x"), FormatError);
    const FramestreamHeader h{8, 6, 29970, 12};
    const auto line = format_framestream_header(h);
    CHECK(line == "FRAMESTREAM 1 8 6 29970 12\n");
    const auto back = parse_framestream_header(line.substr(0, line.size() - 1));
    CHECK(back.width == 8);
    CHECK(back.fps_milli == 29970);
    CHECK(back.count == 12);

    TempDir dir;
    test::write_file(dir / "bad.fs", "GARBAGE\n");
    CHECK_THROWS_AS(open_fs(dir / "bad.fs"), FormatError);
  }

  TEST_CASE("image directory yields frames in lexicographic order") {
    TempDir dir;
    write_png_file(dir / "f001.png", solid_frame(3, 3, 200, 0, 0));
    write_png_file(dir / "f000.png", solid_frame(3, 3, 0, 200, 0));
    test::write_file(dir / "notes.txt", "ignored");
    auto s = open_frame_source(infer_frame_source(dir.str()));
    const auto frames = read_all_frames(*s);
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].index == 0);
    CHECK(frames[1].index == 1);
    CHECK(frames[0].pixels[1] == 200);
    CHECK(frames[1].pixels[0] == 200);
  }

  TEST_CASE("empty image directory is an immediate end of stream") {
    TempDir dir;
    auto s = open_frame_source(infer_frame_source(dir.str()));
    CHECK_FALSE(s->next());
  }

  TEST_CASE("undecodable image is reported with its filename") {
    TempDir dir;
    write_png_file(dir / "a.png", solid_frame(3, 3, 1, 2, 3));
    test::write_file(dir / "b.png", "not a png");
    auto s = open_frame_source(infer_frame_source(dir.str()));
    CHECK(s->next());
    try {
      s->next();
      FAIL("expected a decode error");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("b.png") != std::string::npos);
    }
    CHECK_FALSE(s->next());
  }

  TEST_CASE("missing paths are errors") {
    CHECK_THROWS_AS(open_frame_source(infer_frame_source("/nonexistent/x.fs")), IoError);
    FrameSource dir_src{SourceKind::kImageDirectory, "/nonexistent/dir"};
    CHECK_THROWS_AS(open_frame_source(dir_src), IoError);
  }

  TEST_CASE("decoder subprocess streams framestream from stdout") {
    TempDir dir;
    test::write_file(dir / "clip.raw", hand_stream(4, 2, 5000, 3, 3));
    auto src = infer_frame_source(dir / "clip.raw", "cat {input}");
    CHECK(src.kind == SourceKind::kDecoderSubprocess);
    auto s = open_frame_source(src);
    const auto frames = read_all_frames(*s);
    REQUIRE(frames.size() == 3);
    CHECK(frames[2].timestamp_ms == 400);
  }

  TEST_CASE("decoder failing before the first frame is an error") {
    TempDir dir;
    test::write_file(dir / "clip.mp4", "x");
    auto src = infer_frame_source(dir / "clip.mp4", "sh -c 'exit 3' {input}");
    try {
      auto s = open_frame_source(src);
      s->next();
      FAIL("expected a decoder error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("status 3") != std::string::npos);
    }
    auto no_placeholder = infer_frame_source(dir / "clip.mp4", "cat");
    CHECK_THROWS_AS(open_frame_source(no_placeholder), ConfigError);
  }

  TEST_CASE("decoder paths are shell quoted") {
    TempDir dir;
    const std::string odd = dir / "it's a clip.raw";
    test::write_file(odd, hand_stream(2, 2, 0, 1, 1));
    auto s = open_frame_source(infer_frame_source(odd, "cat {input}"));
    CHECK(read_all_frames(*s).size() == 1);
  }

  TEST_CASE("replaying a source is deterministic") {
    TempDir dir;
    std::mt19937_64 rng(11);
    std::vector<Frame> frames;
    for (int k = 0; k < 6; ++k) frames.push_back(test::random_frame(rng, 7, 5, k));
    write_framestream_file(dir / "d.fs", frames, 25000);
    auto a = open_fs(dir / "d.fs");
    auto b = open_fs(dir / "d.fs");
    CHECK(read_all_frames(*a) == read_all_frames(*b));
  }

  TEST_CASE("frame validation") {
    CHECK_NOTHROW(validate_frame(solid_frame(2, 2, 0, 0, 0)));
    Frame bad = solid_frame(2, 2, 0, 0, 0);
    bad.pixels.pop_back();
    CHECK_THROWS_AS(validate_frame(bad), InvalidArgument);
    Frame big;
    big.width = kMaxFrameDim + 1;
    big.height = 1;
    CHECK_THROWS_AS(validate_frame(big), InvalidArgument);
    std::vector<Frame> mixed{solid_frame(2, 2, 0, 0, 0), solid_frame(3, 2, 0, 0, 0)};
    std::ostringstream out;
    CHECK_THROWS_AS(write_framestream(out, mixed, 0), InvalidArgument);
  }

  TEST_CASE("png round trip is lossless") {
    std::mt19937_64 rng(3);
    const auto f = test::random_frame(rng, 9, 7);
    const auto back = decode_png(encode_png(f));
    CHECK(back.width == 9);
    CHECK(back.height == 7);
    CHECK(back.pixels == f.pixels);
    CHECK(encode_png(f) == encode_png(back));
  }
}
