#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "taco/data_io.hpp"
#include "taco/domain.hpp"

using namespace taco;
using taco_test::random_matrix;
using taco_test::random_ratings;

TEST_CASE("rating matrix keeps entries sorted and answers lookups") {
  RatingMatrix r(2, 3, {{1, 2, Label::kNegative}, {0, 1, Label::kPositive}});
  REQUIRE(r.size() == 2);
  CHECK(r.entries()[0].user == 0);
  CHECK(r.at(0, 1) == Label::kPositive);
  CHECK(r.at(1, 2) == Label::kNegative);
  CHECK_FALSE(r.at(0, 0).has_value());
}

TEST_CASE("rating matrix rejects duplicates, bad indices and bad labels") {
  CHECK_THROWS_AS(RatingMatrix(2, 2, {{0, 0, Label::kPositive},
                                      {0, 0, Label::kNegative}}),
                  DataError);
  CHECK_THROWS_AS(RatingMatrix(2, 2, {{2, 0, Label::kPositive}}), DataError);
  CHECK_THROWS_AS(RatingMatrix(2, 2, {{0, -1, Label::kPositive}}), DataError);
  CHECK_THROWS_AS(RatingMatrix(2, 2, {{0, 0, static_cast<Label>(0)}}),
                  DataError);
}

TEST_CASE("validate_dataset derives the partition") {
  const auto f = ItemFeatureMatrix::from_dense(Matrix::Identity(4, 2));
  RatingMatrix r(1, 4, {{0, 0, Label::kPositive}, {0, 2, Label::kNegative}});
  const UserItemPartition p = validate_dataset(r, f);
  CHECK(p.user(0).pos == IndexSet{0});
  CHECK(p.user(0).neg == IndexSet{2});
  CHECK(p.unrated(0) == IndexSet{1, 3});
}

TEST_CASE("users without ratings are kept with empty sets") {
  const auto f = ItemFeatureMatrix::from_dense(Matrix::Ones(3, 1));
  const UserItemPartition p = validate_dataset(RatingMatrix(2, 3, {}), f);
  REQUIRE(p.n_users() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(p.user(i).pos.empty());
    CHECK(p.user(i).neg.empty());
    CHECK(p.unrated(i) == IndexSet{0, 1, 2});
  }
}

TEST_CASE("validate_dataset rejects an item-count mismatch") {
  const auto f = ItemFeatureMatrix::from_dense(Matrix::Ones(3, 1));
  CHECK_THROWS_AS(validate_dataset(RatingMatrix(1, 4, {}), f), DataError);
}

TEST_CASE("partition law holds on random ratings") {
  auto rng = make_rng(11, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + trial % 17;
    const RatingMatrix r = random_ratings(6, m, 0.4, rng);
    const UserItemPartition p = UserItemPartition::from_ratings(r);
    for (int i = 0; i < p.n_users(); ++i) {
      const auto& u = p.user(i);
      const IndexSet o = p.unrated(i);
      CHECK(u.pos.size() + u.neg.size() + o.size() ==
            static_cast<std::size_t>(m));
      IndexSet all;
      all.insert(all.end(), u.pos.begin(), u.pos.end());
      all.insert(all.end(), u.neg.begin(), u.neg.end());
      all.insert(all.end(), o.begin(), o.end());
      std::sort(all.begin(), all.end());
      for (int j = 0; j < m; ++j) CHECK(all[j] == j);
    }
  }
}

TEST_CASE("partition rejects overlapping or out-of-range sets") {
  CHECK_THROWS_AS(UserItemPartition(3, {{{0, 1}, {1}}}), DataError);
  CHECK_THROWS_AS(UserItemPartition(3, {{{3}, {}}}), DataError);
  CHECK_THROWS_AS(UserItemPartition(3, {{{1, 1}, {}}}), DataError);
}

TEST_CASE("item features") {
  SUBCASE("duplicate triplets are an error") {
    CHECK_THROWS_AS(ItemFeatureMatrix::from_triplets(
                        2, 2, {{0, 1, 1.0}, {0, 1, 2.0}}),
                    DataError);
  }
  SUBCASE("non-finite values are an error") {
    CHECK_THROWS_AS(ItemFeatureMatrix::from_triplets(
                        2, 2, {{0, 1, std::numeric_limits<double>::quiet_NaN()}}),
                    DataError);
  }
  SUBCASE("scores agree with dense products") {
    auto rng = make_rng(3, 0);
    const Matrix x = random_matrix(7, 4, rng);
    const auto f = ItemFeatureMatrix::from_dense(x);
    const Vector w = taco_test::random_vector(4, rng);
    const Vector s = f.scores(w);
    for (int j = 0; j < 7; ++j) {
      CHECK(s(j) == f.dot(j, w));
      CHECK(std::abs(s(j) - x.row(j).dot(w)) < 1e-12);
    }
  }
}

TEST_CASE("model and factored model invariants") {
  Matrix w = Matrix::Zero(2, 3);
  w(1, 2) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Model{w}, NumericError);

  CHECK_THROWS_AS(FactoredModel(Matrix::Ones(2, 3), Matrix::Ones(3, 3)),
                  DataError);  // k > min(n, d)
  CHECK_THROWS_AS(FactoredModel(Matrix::Ones(2, 1), Matrix::Ones(3, 2)),
                  DataError);  // rank mismatch
  CHECK_THROWS_AS(FactoredModel(Matrix::Ones(2, 0), Matrix::Ones(3, 0)),
                  DataError);

  auto rng = make_rng(5, 0);
  const FactoredModel fm(random_matrix(4, 2, rng), random_matrix(3, 2, rng));
  const Matrix r = fm.reconstruct();
  CHECK(r.rows() == 4);
  CHECK(r.cols() == 3);
  CHECK((r - fm.u() * fm.v().transpose()).norm() == 0.0);
}

TEST_CASE("similarity graph validation") {
  SparseMatrix s(2, 2);
  s.insert(0, 1) = 1.0;
  CHECK_THROWS_AS(SimilarityGraph{s}, DataError);  // asymmetric
  s.insert(1, 0) = 1.0;
  CHECK_NOTHROW(SimilarityGraph{s});
  s.coeffRef(0, 0) = 0.5;
  CHECK_THROWS_AS(SimilarityGraph{s}, DataError);  // diagonal

  CHECK_THROWS_AS(
      SimilarityGraph::from_triplets(2, {{0, 1, -1.0}, {1, 0, -1.0}}),
      DataError);
  CHECK_THROWS_AS(SimilarityGraph::from_triplets(2, {{0, 1, 1.0}, {1, 0, 2.0}}),
                  DataError);
  const auto g = SimilarityGraph::from_triplets(3, {{0, 1, 0.5}, {2, 1, 2.0}});
  CHECK(g.similarity().coeff(1, 0) == 0.5);
  CHECK(g.similarity().coeff(1, 2) == 2.0);
  CHECK(g.degree()(1) == 2.5);
}

TEST_CASE("laplacian has zero row sums and is positive semidefinite") {
  auto rng = make_rng(8, 0);
  std::uniform_real_distribution<double> weight(0.0, 3.0);
  std::bernoulli_distribution edge(0.4);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 9;
    std::vector<Triplet> t;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (edge(rng)) t.emplace_back(a, b, weight(rng));
    const auto g = SimilarityGraph::from_triplets(n, t);
    const Matrix l = Matrix(g.laplacian());
    for (int i = 0; i < n; ++i) CHECK(std::abs(l.row(i).sum()) < 1e-12);
    for (int k = 0; k < 10; ++k) {
      const Vector v = taco_test::random_vector(n, rng);
      CHECK(v.dot(l * v) >= -1e-12);
    }
  }
}

TEST_CASE("hyperparameter validation") {
  Hyperparams hp;
  CHECK_NOTHROW(hp.validate());
  Hyperparams bad = hp;
  bad.lambda = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = hp;
  bad.gamma = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = hp;
  bad.step.eta0 = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = hp;
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_NOTHROW(bad.validate(/*allow_zero_iters=*/true));
  bad = hp;
  bad.rank = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = hp;
  bad.init_sigma = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("ratings and features survive a write/read cycle") {
  taco_test::TempDir dir("domain-roundtrip");
  auto rng = make_rng(21, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const RatingMatrix r = random_ratings(5, 9, 0.3, rng);
    write_ratings(dir / "r.tsv", r, 42);
    CHECK(read_ratings(dir / "r.tsv") == r);

    std::vector<Triplet> t;
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::bernoulli_distribution nz(0.3);
    for (int j = 0; j < 9; ++j)
      for (int k = 0; k < 6; ++k)
        if (nz(rng)) t.emplace_back(j, k, u(rng) / 3.0);
    const auto f = ItemFeatureMatrix::from_triplets(9, 6, t);
    write_features(dir / "f.tsv", f, 42);
    CHECK(read_features(dir / "f.tsv") == f);
  }
}
