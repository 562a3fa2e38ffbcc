#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "latqubo/csv.hpp"
#include "latqubo/dataset.hpp"

using namespace latqubo;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  auto dir = std::filesystem::temp_directory_path() / "latqubo_test_csv";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

}  // namespace

TEST(Csv, ReadsNumericColumn) {
  const auto p = write_temp("a.csv", "id,fitness\na,0.5\nb,1.5");
  EXPECT_EQ(read_csv_numeric_column(p, "fitness"), (Vector{0.5, 1.5}));
  EXPECT_EQ(read_csv_column(p, "id"), (std::vector<std::string>{"a", "b"}));
}

TEST(Csv, MissingColumn) {
  const auto p = write_temp("b.csv", "id,fitness\na,0.5\nb,1.5");
  EXPECT_THROW(read_csv_numeric_column(p, "score"), MissingColumnError);
}

TEST(Csv, ParseErrorReportsRow) {
  const auto p = write_temp("c.csv", "id,fitness\na,abc\nb,1.5");
  try {
    read_csv_numeric_column(p, "fitness");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(Csv, QuotedFieldsCrlfAndBom) {
  const auto p = write_temp("d.csv", "\xEF\xBB\xBFname,\"fit,ness\"\r\n\"x,y\",+2e-1\r\n\r\n\"he said \"\"hi\"\"\",-3\r\n");
  EXPECT_EQ(read_csv_numeric_column(p, "fit,ness"), (Vector{0.2, -3.0}));
  EXPECT_EQ(read_csv_column(p, "name"), (std::vector<std::string>{"x,y", "he said \"hi\""}));
}

TEST(Csv, RaggedRowIsParseError) {
  const auto p = write_temp("e.csv", "a,b\n1,2\n3\n");
  EXPECT_THROW(read_csv_numeric_column(p, "b"), ParseError);
}

TEST(Csv, FitnessLoaderDispatchesOnExtension) {
  const auto p = write_temp("f.csv", "fitness\n1\n2\n");
  EXPECT_EQ(load_fitness(p), (Vector{1, 2}));
  const auto npy = std::filesystem::temp_directory_path() / "latqubo_test_csv" / "f.npy";
  write_npy(npy, Vector{3, 4});
  EXPECT_EQ(load_fitness(npy), (Vector{3, 4}));
}

TEST(Dataset, RejectsNonFiniteAndMisalignment) {
  EXPECT_THROW(Dataset(Matrix(2, 1, {1, std::nan("")}), Vector{1, 2}), ValidationError);
  EXPECT_THROW(Dataset(Matrix(2, 1, {1, 2}), Vector{1, INFINITY}), ValidationError);
  EXPECT_THROW(Dataset(Matrix(2, 1, {1, 2}), Vector{1}), DimensionError);
  EXPECT_THROW(Dataset(Matrix(2, 1, {1, 2}), Vector{1, 2}, std::vector<std::string>{"A"}), DimensionError);
  Dataset ok(Matrix(2, 1, {1, 2}), Vector{1, 2}, std::vector<std::string>{"A", "B"});
  EXPECT_EQ(ok.size(), 2u);
}
