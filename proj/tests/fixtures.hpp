#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

// Shared test fixtures. The clinical manifest below is the full 75-subject
// cohort (37 PD, 38 controls) used to pin the group-summary statistics.

namespace testfx {

inline const char* kClinicalManifest =
    "id,sex,diagnosis,age,led,updrs_v,years_since_diag\n"
    "01,F,PD,68,1115,2,6\n"
    "02,F,PD,78,2110,2,8\n"
    "03,F,PD,69,1557,2,7\n"
    "04,F,PD,79,1691,2,12\n"
    "05,F,PD,69,600,2,2\n"
    "06,F,PD,57,1272,2,9\n"
    "07,F,PD,78,666,3,19\n"
    "08,F,PD,58,397,1,5\n"
    "09,M,PD,78,2066,1,3\n"
    "10,M,PD,74,1480,2.5,3\n"
    "13,M,PD,65,990,1,2\n"
    "14,M,PD,64,1253,3,8\n"
    "15,F,PD,69,990,2.5,17\n"
    "16,M,PD,67,1188,2,4\n"
    "17,F,PD,75,1370,5,18\n"
    "18,F,PD,76,1250,2.5,17\n"
    "19,F,PD,86,750,2,6\n"
    "20,F,PD,79,2227,2,8\n"
    "22,F,PD,67,645,2,14\n"
    "23,F,PD,73,1235,2,9\n"
    "24,M,PD,70,1317,4,7\n"
    "25,M,PD,60,1143,3,10\n"
    "26,F,healthy,57,-,-,-\n"
    "27,M,healthy,92,-,-,-\n"
    "28,F,healthy,52,-,-,-\n"
    "29,F,healthy,58,-,-,-\n"
    "30,M,healthy,69,-,-,-\n"
    "31,M,healthy,76,-,-,-\n"
    "32,F,healthy,59,-,-,-\n"
    "33,F,PD,62,750,2,4\n"
    "34,M,PD,61,2547,2,5\n"
    "36,M,PD,90,750,2,3\n"
    "39,M,healthy,65,-,-,-\n"
    "40,M,healthy,53,-,-,-\n"
    "41,M,healthy,78,-,-,-\n"
    "43,M,PD,48,1080,1,4\n"
    "44,F,PD,62,397,1,5\n"
    "48,M,PD,87,1450,4,12\n"
    "49,M,healthy,58,-,-,-\n"
    "51,F,healthy,48,-,-,-\n"
    "52,F,healthy,44,-,-,-\n"
    "53,M,PD,84,1942,2,2\n"
    "54,M,PD,69,2546,2,10\n"
    "55,M,PD,63,1930,2.5,14\n"
    "57,M,healthy,80,-,-,-\n"
    "60,M,healthy,65,-,-,-\n"
    "61,F,healthy,59,-,-,-\n"
    "62,F,healthy,65,-,-,-\n"
    "66,F,healthy,69,-,-,-\n"
    "67,M,healthy,59,-,-,-\n"
    "69,F,healthy,74,-,-,-\n"
    "70,F,healthy,47,-,-,-\n"
    "71,M,healthy,52,-,-,-\n"
    "72,M,healthy,45,-,-,-\n"
    "73,F,healthy,64,-,-,-\n"
    "74,M,PD,53,2387,2.5,9\n"
    "75,M,PD,73,2010,2.5,12\n"
    "76,M,healthy,56,-,-,-\n"
    "77,M,PD,74,2337,3,1\n"
    "78,M,PD,36,800,2,2\n"
    "80,M,PD,67,3544,3,5\n"
    "82,M,healthy,45,-,-,-\n"
    "83,F,healthy,74,-,-,-\n"
    "84,F,healthy,62,-,-,-\n"
    "85,F,healthy,75,-,-,-\n"
    "87,M,healthy,57,-,-,-\n"
    "89,M,healthy,63,-,-,-\n"
    "90,M,healthy,71,-,-,-\n"
    "91,F,healthy,64,-,-,-\n"
    "92,F,healthy,58,-,-,-\n"
    "94,M,healthy,64,-,-,-\n"
    "95,M,healthy,74,-,-,-\n"
    "96,F,healthy,77,-,-,-\n"
    "97,M,healthy,44,-,-,-\n"
    "98,F,PD,77,1210,2,6\n";

class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("pdhw_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline std::filesystem::path write_text(const std::filesystem::path& path,
                                        const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testfx
