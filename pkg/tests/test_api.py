import pytest

from app import create_app

EXAMPLE1_GENERATORS = "1+D^2, 1+D+D^2"
EXAMPLE2_GENERATORS = "1+D^2, 2+D, 0; 1, 0, 2"


def post(client, path, payload):
    return client.post(f"/api/{path}", json=payload)


@pytest.fixture
def example1_document(client):
    response = post(client, "build", {"p": 2, "generators": EXAMPLE1_GENERATORS})
    assert response.status_code == 200
    return response.get_json()


@pytest.fixture
def cycle_document(client):
    response = post(
        client,
        "build",
        {
            "p": 2,
            "generators": EXAMPLE1_GENERATORS,
            "sections": 2,
            "closure": "tailbite",
        },
    )
    assert response.status_code == 200
    return response.get_json()


class TestAppRoutes:
    """Application-level routes and error pages."""

    def test_health(self, client):
        """Test the health endpoint reports the service and the cache."""
        response = client.get("/health")
        assert response.status_code == 200
        data = response.get_json()
        assert data["status"] == "healthy"
        assert data["service"] == "nrdual"
        assert data["budget"] == 2**20
        assert data["cache"]["status"] == "healthy"

    def test_cache_status(self, client):
        """Test the cache status endpoint."""
        response = client.get("/cache/status")
        assert response.status_code == 200
        assert response.get_json()["backend"] in ("memory", "redis")

    def test_index_lists_the_api(self, client):
        """Test that the index lists every API endpoint."""
        data = client.get("/").get_json()
        assert data["service"] == "nrdual"
        assert data["endpoints"] == [
            "/api/behavior",
            "/api/build",
            "/api/dual",
            "/api/spa",
            "/api/verify",
            "/api/wam",
        ]

    def test_not_found_is_json(self, client):
        """Test that unknown paths answer with a JSON error."""
        response = client.get("/nowhere")
        assert response.status_code == 404
        assert response.get_json() == {"error": "Not found"}


class TestBuildRoute:
    """POST /api/build"""

    def test_example1(self, example1_document):
        """Test the open binary section."""
        assert example1_document["p"] == 2
        assert example1_document["fragment"] is True
        assert [c["id"] for c in example1_document["constraints"]] == ["C0"]
        assert [v["id"] for v in example1_document["vars"]] == ["S0", "A0", "S1"]

    def test_example2(self, client):
        """Test the ternary section's constraint length."""
        response = post(client, "build", {"p": 3, "generators": EXAMPLE2_GENERATORS})
        generators = response.get_json()["constraints"][0]["generators"]
        assert len(generators) == 4
        assert all(len(g) == 7 for g in generators)

    def test_parse_error(self, client):
        """Test that a malformed matrix answers 400 with the error type."""
        response = post(client, "build", {"p": 2, "generators": "1+2D, 1"})
        assert response.status_code == 400
        data = response.get_json()
        assert data["type"] == "CoefficientError"
        assert "offset 2" in data["error"]

    def test_missing_field(self, client):
        """Test a request without generators."""
        response = post(client, "build", {"p": 2})
        assert response.status_code == 400
        assert "'generators' not provided" in response.get_json()["error"]

    def test_bad_integers_and_closure(self, client):
        """Test that a non-integer p or an unknown closure is a 400."""
        response = post(client, "build", {"p": "two", "generators": "1, 1"})
        assert response.status_code == 400
        assert "'p' must be an integer" in response.get_json()["error"]
        payload = {"p": 2, "generators": "1, 1", "closure": "loop"}
        assert post(client, "build", payload).status_code == 400

    def test_body_must_be_an_object(self, client):
        """Test a JSON array body."""
        response = post(client, "build", [1, 2])
        assert response.status_code == 400
        assert response.get_json()["type"] == "FormatError"


class TestDualRoute:
    """POST /api/dual"""

    def test_sign_inverters(self, client, example1_document):
        """Test that the trailing state port of the section is inverted."""
        response = post(client, "dual", {"realization": example1_document})
        assert response.status_code == 200
        data = response.get_json()
        assert data["sign_inverters"] == [
            {"constraint": "C0", "port": 2, "state": "S1", "sign": -1}
        ]
        assert data["realization"]["constraints"][0]["ports"][2]["sign"] == -1

    def test_dual_of_the_dual(self, client, cycle_document):
        """Test that dualizing twice restores the realization."""
        once = post(client, "dual", {"realization": cycle_document}).get_json()
        twice = post(client, "dual", {"realization": once["realization"]}).get_json()
        assert twice["realization"] == cycle_document

    def test_malformed_realization(self, client):
        """Test a realization document with missing fields."""
        response = post(client, "dual", {"realization": {"p": 2}})
        assert response.status_code == 400
        assert response.get_json()["type"] == "FormatError"


class TestWamRoute:
    """POST /api/wam"""

    def test_primal(self, client, example1_document):
        """Test the 4x4 binary CWAM."""
        response = post(client, "wam", {"realization": example1_document})
        assert response.status_code == 200
        data = response.get_json()
        assert data["domain"] == "primal"
        assert data["rows"] == ["00", "10", "01", "11"]
        assert data["entries"][0][1] == [
            {"exps": [0, 2], "coeff": {"den": "1", "num": ["1"]}}
        ]

    def test_dual_domains_agree(self, client, example1_document):
        """Test that the transformed and the enumerated dual WAMs are identical."""
        payload = {"realization": example1_document, "domain": "dual-transform"}
        transformed = post(client, "wam", payload).get_json()
        payload["domain"] = "dual-direct"
        direct = post(client, "wam", payload).get_json()
        assert transformed == direct

    def test_hwam(self, client, example1_document):
        """Test the HWAM entry (0, 1) = w^2."""
        payload = {"realization": example1_document, "kind": "hwam"}
        response = post(client, "wam", payload)
        assert response.get_json()["entries"][0][1] == ["0", "0", "1"]

    def test_repeated_request_is_served_the_same(self, client, example1_document):
        """Test that a cached answer equals the first one."""
        payload = {
            "realization": example1_document,
            "kind": "hwam",
            "domain": "dual-direct",
        }
        first = post(client, "wam", payload).get_json()
        second = post(client, "wam", payload).get_json()
        assert first == second

    def test_unknown_kind(self, client, example1_document):
        """Test a kind other than cwam or hwam."""
        payload = {"realization": example1_document, "kind": "swam"}
        response = post(client, "wam", payload)
        assert response.status_code == 400

    def test_unknown_constraint(self, client, example1_document):
        """Test a constraint id that the realization does not declare."""
        payload = {"realization": example1_document, "constraint": "C9"}
        response = post(client, "wam", payload)
        assert response.status_code == 400
        assert response.get_json()["type"] == "DomainError"


class TestVerifyRoute:
    """POST /api/verify"""

    def test_pass(self, client, cycle_document):
        """Test a two-section cycle with the realized-code duality check."""
        response = post(client, "verify", {"realization": cycle_document})
        assert response.status_code == 200
        data = response.get_json()
        assert data["result"] == "PASS"
        assert [c["constraint"] for c in data["constraints"]] == ["C0", "C1"]
        assert data["duality"] == {"checked": True, "passed": True}

    def test_corrupted_claimed_dual(self, client, cycle_document):
        """Test 422 when a claimed dual constraint is not the dual."""
        dualized = post(client, "dual", {"realization": cycle_document}).get_json()
        claimed = dualized["realization"]
        primal_c0 = cycle_document["constraints"][0]
        claimed["constraints"][0]["generators"] = primal_c0["generators"]
        payload = {"realization": cycle_document, "against": claimed}
        response = post(client, "verify", payload)
        assert response.status_code == 422
        assert response.get_json()["result"] == "FAIL"


class TestSpaRoute:
    """POST /api/spa"""

    def setup_method(self):
        """Set up test fixtures before each test method."""
        self.realization = {
            "p": 2,
            "fragment": True,
            "vars": [
                {"id": "S0", "kind": "state", "dim": 1},
                {"id": "A0", "kind": "symbol", "dim": 1},
                {"id": "S1", "kind": "state", "dim": 1},
            ],
            "constraints": [
                {
                    "id": "C0",
                    "generators": ["011", "101"],
                    "ports": [{"var": "S0"}, {"var": "A0"}, {"var": "S1"}],
                }
            ],
        }
        self.message = {"group": {"p": 2, "dim": 1}, "values": ["2", "3"]}
        self.weights = [{"group": {"p": 2, "dim": 1}, "values": ["5", "7"]}]

    def test_both_paths(self, client):
        """Test equal results with 4 products direct and 2 through the dual."""
        response = post(
            client,
            "spa",
            {
                "realization": self.realization,
                "message": self.message,
                "weights": self.weights,
                "path": "both",
            },
        )
        assert response.status_code == 200
        data = response.get_json()
        assert data["equal"] is True
        assert data["dual"]["values"] == ["31", "29"]
        assert (data["direct_muls"], data["dual_muls"]) == (4, 2)

    def test_unknown_path(self, client):
        """Test a path other than direct, dual or both."""
        response = post(
            client,
            "spa",
            {
                "realization": self.realization,
                "message": self.message,
                "weights": self.weights,
                "path": "sideways",
            },
        )
        assert response.status_code == 400

    def test_fractional_message(self, client):
        """Test that rational inputs keep exact fractions."""
        message = {"group": {"p": 2, "dim": 1}, "values": ["1/2", "1/3"]}
        response = post(
            client,
            "spa",
            {
                "realization": self.realization,
                "message": message,
                "weights": self.weights,
            },
        )
        # (1/2 * 5 + 1/3 * 7, 1/2 * 7 + 1/3 * 5)
        assert response.get_json()["values"] == ["29/6", "31/6"]


class TestBehaviorRoute:
    """POST /api/behavior"""

    def test_code(self, client, cycle_document):
        """Test the realized (4, 2) code of the cycle."""
        response = post(client, "behavior", {"realization": cycle_document})
        data = response.get_json()
        assert (data["n"], data["k"]) == (4, 2)

    def test_behavior(self, client, cycle_document):
        """Test the configuration listing."""
        payload = {"realization": cycle_document, "emit": "behavior"}
        response = post(client, "behavior", payload)
        assert response.get_json()["size"] == 4

    def test_budget(self, client):
        """Test 413 when the configured budget is too small."""
        big = post(
            client,
            "build",
            {
                "p": 3,
                "generators": EXAMPLE2_GENERATORS,
                "sections": 4,
                "closure": "tailbite",
            },
        ).get_json()
        small_app = create_app({"TESTING": True, "NR_ENUMERATION_BUDGET": 100})
        small = small_app.test_client()
        response = post(small, "behavior", {"realization": big})
        assert response.status_code == 413
        assert response.get_json()["type"] == "ResourceError"
