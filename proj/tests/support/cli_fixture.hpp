// Copyright 2026 The obbkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// A small on-disk scene plus one argv per CLI subcommand exercising it.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "obbkit/cli.hpp"

namespace obbkit::testing {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

class CliFixture {
 public:
  explicit CliFixture(const std::string& tag)
      : root_(std::filesystem::temp_directory_path() / ("obbkit_cli_" + tag)) {
    std::filesystem::remove_all(root_);
    write_file(gt() / "P0001.txt",
               "imagesource:GoogleEarth\ngsd:0.146\n"
               "60.0 0.0 100.0 0.0 100.0 20.0 60.0 20.0 plane 0\n"
               "200 200 230 200 230 260 200 260 ship 0\n"
               "400 400 420 400 420 410 400 410 ship 1\n");
    write_file(gt() / "P0002.txt", "10 10 50 10 50 30 10 30 plane 0\n");
    write_file(det() / "Task1_plane.txt",
               "P0001 0.950000 60.0 0.0 100.0 0.0 100.0 20.0 60.0 20.0\n"
               "P0002 0.900000 10 10 50 10 50 30 10 30\n");
    write_file(det() / "Task1_ship.txt", "P0001 0.800000 200 200 230 200 230 260 200 260\n");
    write_file(root_ / "nms_in.txt",
               "img 0.9 0 0 10 0 10 5 0 5\nimg 0.8 0 0 10 0 10 5 0 5\nimg 0.7 100 100 110 100 110 105 100 105\n");
    write_file(root_ / "windows.txt", "img__0__0 img 0 0 100 100\nimg__80__0 img 80 0 100 100\n");
    write_file(patches() / "Task1_plane.txt",
               "img__0__0 0.9 85 45 95 45 95 55 85 55\nimg__80__0 0.8 5 45 15 45 15 55 5 55\n");
  }
  ~CliFixture() { std::filesystem::remove_all(root_); }

  std::filesystem::path root() const { return root_; }
  std::filesystem::path gt() const { return root_ / "gt"; }
  std::filesystem::path det() const { return root_ / "det"; }
  std::filesystem::path patches() const { return root_ / "patches"; }

  /// One invocation per subcommand, all expected to succeed.
  std::vector<std::vector<std::string>> invocations() const {
    return {
        {"iou", "--box", "0,0,4,2,0", "--box", "1,0,4,2,30"},
        {"eval", "--gt", gt().string(), "--det", det().string()},
        {"nms", "--in", (root_ / "nms_in.txt").string(), "--tau", "0.5"},
        {"fit", "--loss", "piou", "--gt", "0,0,20.4,20,0", "--init", "0,0,20.4,20,45", "--steps", "120", "--seed",
         "3", "--jitter-angle", "5", "--jitter-translation", "1"},
        {"fit", "--loss", "smoothl1", "--gt", "0,0,20.4,20,0", "--alt-gt", "0,0,20,20.4,90", "--init",
         "0,0,20.4,20,45", "--steps", "50"},
        {"sweep", "--gt", "0,0,20,10,0", "--from", "170", "--to", "190"},
        {"tile", "--width", "2048", "--height", "2048", "--patch", "1024", "--stride", "824"},
        {"merge", "--windows", (root_ / "windows.txt").string(), "--dets", patches().string()},
        {"acm", "--box", "10,10,8,4,30", "--loc", "8,8", "--stride", "8"},
    };
  }

 private:
  std::filesystem::path root_;
};

}  // namespace obbkit::testing
