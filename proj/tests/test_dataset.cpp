#include <doctest.h>

#include <sstream>

#include "bvs/dataset.hpp"

using namespace bvs;

TEST_CASE("ingest a 3-row CSV") {
  std::istringstream csv(
      "time,status,age,biomarker\n"
      "5.0,1,60,1.2\n"
      "2.5,0,52,-0.4\n"
      "7.1,1,71,0.9\n");
  ColumnSchema schema;
  schema.time_col = "time";
  schema.status_col = "status";
  const SurvivalDataset ds = ingest_dataset(csv, schema);
  CHECK(ds.n() == 3);
  CHECK(ds.p() == 2);
  CHECK(ds.n_events() == 2);
  // sorted by time
  CHECK(ds.times(0) == doctest::Approx(2.5));
  CHECK(ds.times(2) == doctest::Approx(7.1));
  CHECK(ds.status(0) == 0);
  CHECK(ds.design(0, 0) == doctest::Approx(52));
}

TEST_CASE("bad status value is rejected with the offending row") {
  std::istringstream csv(
      "time,status,x\n"
      "1,1,0.5\n"
      "2,2,0.1\n");
  ColumnSchema schema;
  schema.time_col = "time";
  schema.status_col = "status";
  CHECK_THROWS_WITH_AS(ingest_dataset(csv, schema),
                       doctest::Contains("row 3"), ValidationError);
}

TEST_CASE("missing and non-numeric cells are rejected") {
  ColumnSchema schema;
  schema.time_col = "time";
  schema.status_col = "status";
  SUBCASE("non-numeric time") {
    std::istringstream csv("time,status,x\nfoo,1,0.5\n");
    CHECK_THROWS_AS(ingest_dataset(csv, schema), ValidationError);
  }
  SUBCASE("non-numeric covariate") {
    std::istringstream csv("time,status,x\n1,1,abc\n");
    CHECK_THROWS_WITH_AS(ingest_dataset(csv, schema),
                         doctest::Contains("column 'x'"), ValidationError);
  }
  SUBCASE("empty cell") {
    std::istringstream csv("time,status,x\n1,1,\n2,1,0.3\n");
    CHECK_THROWS_AS(ingest_dataset(csv, schema), ValidationError);
  }
  SUBCASE("no covariates") {
    std::istringstream csv("time,status\n1,1\n");
    CHECK_THROWS_AS(ingest_dataset(csv, schema), ValidationError);
  }
}

TEST_CASE("all-censored datasets are rejected") {
  std::istringstream csv("time,status,x\n1,0,0.5\n2,0,0.3\n");
  ColumnSchema schema;
  schema.time_col = "time";
  schema.status_col = "status";
  CHECK_THROWS_WITH_AS(ingest_dataset(csv, schema),
                       doctest::Contains("censored"), ValidationError);
}

TEST_CASE("categorical fixed covariate expands to reference-coded indicators") {
  std::istringstream csv(
      "time,status,stage,gene\n"
      "1,1,I,0.1\n"
      "2,0,II,0.2\n"
      "3,1,III,0.3\n"
      "4,1,II,0.4\n");
  ColumnSchema schema;
  schema.time_col = "time";
  schema.status_col = "status";
  schema.fixed_cols = {"stage"};
  const SurvivalDataset ds = ingest_dataset(csv, schema);
  // 3 levels -> 2 indicators, plus the gene column
  CHECK(ds.p() == 3);
  CHECK(ds.column_names[0] == "stage_II");
  CHECK(ds.column_names[1] == "stage_III");
  CHECK(ds.fixed_columns == std::vector<int>{0, 1});
  // row with stage II has indicator (1, 0)
  CHECK(ds.design(1, 0) == doctest::Approx(1.0));
  CHECK(ds.design(1, 1) == doctest::Approx(0.0));
  // categorical non-fixed columns are rejected
  std::istringstream csv2("time,status,stage\n1,1,I\n2,0,II\n");
  ColumnSchema schema2;
  schema2.time_col = "time";
  schema2.status_col = "status";
  CHECK_THROWS_AS(ingest_dataset(csv2, schema2), ValidationError);
}

TEST_CASE("TSV input with tab delimiter") {
  std::istringstream tsv("time\tstatus\tx\n1\t1\t0.5\n2\t0\t0.1\n");
  ColumnSchema schema;
  schema.time_col = "time";
  schema.status_col = "status";
  const SurvivalDataset ds = ingest_dataset(tsv, schema);
  CHECK(ds.n() == 2);
  CHECK(ds.p() == 1);
}

TEST_CASE("sort_by_time permutes and is idempotent") {
  Eigen::VectorXd times(3);
  times << 3, 1, 2;
  Eigen::VectorXi status(3);
  status << 1, 1, 0;
  Eigen::MatrixXd X(3, 1);
  X << 30, 10, 20;
  const SurvivalDataset ds = make_dataset(times, status, X, {"x"}, {});
  CHECK(ds.times(0) == doctest::Approx(1));
  CHECK(ds.times(2) == doctest::Approx(3));
  CHECK(ds.status(0) == 1);
  CHECK(ds.status(1) == 0);
  CHECK(ds.status(2) == 1);
  CHECK(ds.design(0, 0) == doctest::Approx(10));
  CHECK(ds.sort_permutation == std::vector<int>{1, 2, 0});

  const SurvivalDataset again = sort_by_time(ds);
  CHECK(again.sort_permutation == ds.sort_permutation);
  CHECK((again.times - ds.times).norm() == doctest::Approx(0));
}

TEST_CASE("tied times: events first, warning flagged") {
  Eigen::VectorXd times(3);
  times << 2, 2, 1;
  Eigen::VectorXi status(3);
  status << 0, 1, 1;
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  const SurvivalDataset ds = make_dataset(times, status, X, {"x"}, {});
  CHECK(ds.had_ties);
  CHECK(!ds.warnings.empty());
  CHECK(ds.times(1) == doctest::Approx(2));
  CHECK(ds.status(1) == 1);  // event ordered before the censoring at t=2
  CHECK(ds.status(2) == 0);
}

TEST_CASE("submatrix slices in model order") {
  Eigen::VectorXd times(3);
  times << 1, 2, 3;
  Eigen::VectorXi status(3);
  status << 1, 1, 1;
  Eigen::MatrixXd X(3, 3);
  X << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const SurvivalDataset ds = make_dataset(times, status, X, {"a", "b", "c"}, {});

  const Eigen::MatrixXd sub = ds.submatrix(ModelId({1}));
  CHECK(sub.cols() == 1);
  CHECK(sub(0, 0) == doctest::Approx(2));

  const Eigen::MatrixXd full = ds.submatrix(ModelId({0, 1, 2}));
  CHECK((full - ds.design).norm() == doctest::Approx(0));

  CHECK_THROWS_AS(ds.submatrix(ModelId({5})), std::out_of_range);
}

TEST_CASE("fixed columns land in every derived model id") {
  Eigen::VectorXd times(4);
  times << 1, 2, 3, 4;
  Eigen::VectorXi status(4);
  status << 1, 1, 0, 1;
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(4, 4);
  const SurvivalDataset ds =
      make_dataset(times, status, X, {"a", "b", "c", "d"}, {1, 3});
  const ModelId fixed = ds.fixed_model();
  CHECK(fixed.indices() == std::vector<int>{1, 3});
  CHECK(fixed.with(0).indices() == std::vector<int>{0, 1, 3});
  CHECK(fixed.with(0).without(0) == fixed);
  CHECK(ds.is_fixed(3));
  CHECK(!ds.is_fixed(0));
}

TEST_CASE("standardization scales non-fixed columns and reports factors") {
  Eigen::VectorXd times(4);
  times << 1, 2, 3, 4;
  Eigen::VectorXi status(4);
  status << 1, 1, 1, 1;
  Eigen::MatrixXd X(4, 2);
  X << 10, 1, 20, 0, 30, 1, 40, 0;
  const SurvivalDataset ds =
      make_dataset(times, status, X, {"big", "flag"}, {1}, true);
  CHECK(ds.design.col(0).mean() == doctest::Approx(0.0));
  const double var = ds.design.col(0).squaredNorm() / 3.0;
  CHECK(var == doctest::Approx(1.0));
  // fixed column untouched
  CHECK(ds.design.col(1).maxCoeff() == doctest::Approx(1.0));
  CHECK(ds.scale_factor[0] > 1.0);
  CHECK(ds.scale_factor[1] == doctest::Approx(1.0));
}

TEST_CASE("ModelId ordering and containment") {
  ModelId a({3, 1, 2});
  CHECK(a.indices() == std::vector<int>{1, 2, 3});
  CHECK(a.contains(2));
  CHECK(!a.contains(4));
  ModelId b({1, 2});
  CHECK(b < a);
  CHECK(a.to_string() == "{1,2,3}");
}
