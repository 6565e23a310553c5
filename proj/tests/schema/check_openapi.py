# Copyright 2026 The DetoxForge Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Checks api/openapi.json with the reference jsonschema implementation.

Every component schema must be a valid 2020-12 schema, every $ref must
resolve, and a few hand-written instances must validate (or fail) as
expected. Exits 77 when jsonschema is not installed so ctest reports a skip.
"""

import json
import pathlib
import sys

try:
    import jsonschema
    from referencing import Registry, Resource
except ImportError:
    print("jsonschema not installed; skipping")
    sys.exit(77)


def refs(node):
    if isinstance(node, dict):
        for key, value in node.items():
            if key == "$ref":
                yield value
            else:
                yield from refs(value)
    elif isinstance(node, list):
        for value in node:
            yield from refs(value)


def main(api_dir):
    doc = json.loads((api_dir / "openapi.json").read_text())
    ratings = json.loads((api_dir / "ratings.json").read_text())
    schemas = doc["components"]["schemas"]
    failures = []

    meta = jsonschema.Draft202012Validator
    for name, schema in schemas.items():
        try:
            meta.check_schema(schema)
        except jsonschema.SchemaError as e:
            failures.append(f"{name}: {e.message}")

    for ref in set(refs(doc)):
        if not ref.startswith("#/components/schemas/") or ref.rsplit("/", 1)[1] not in schemas:
            failures.append(f"unresolved $ref {ref}")

    registry = Registry().with_resource("urn:detoxforge", Resource.from_contents(
        {**doc, "$schema": "https://json-schema.org/draft/2020-12/schema"}))

    def validator(name):
        return meta({"$ref": f"urn:detoxforge#/components/schemas/{name}"}, registry=registry)

    cases = [
        ("ExplanationRatings", {"relevance": "A", "comprehensiveness": "D", "convincing": "B"}, True),
        ("ExplanationRatings", {"relevance": "E", "comprehensiveness": "D", "convincing": "B"}, False),
        ("ReviewInput", {"job_id": "j", "reviewer_id": "r", "detoxifiability": "non_detoxifiable",
                         "rating": "T"}, True),
        ("ReviewInput", {"job_id": "j", "reviewer_id": "r", "detoxifiability": "maybe", "rating": "A"}, False),
        ("Error", {"error": {"code": "QueueFull", "message": "busy"}}, True),
        ("DetoxRequest", {"text": "x", "mode": "cot_expl",
                          "endpoints": {"detox_model": "m", "paraphrase_classifier": "p"}}, True),
        ("DetoxRequest", {"text": "x", "mode": "shout",
                          "endpoints": {"detox_model": "m", "paraphrase_classifier": "p"}}, False),
    ]
    for name, instance, ok in cases:
        valid = validator(name).is_valid(instance)
        if valid != ok:
            failures.append(f"{name}: expected {'valid' if ok else 'invalid'} for {json.dumps(instance)}")

    # The rating codes published for the review console match the enums.
    codes = sorted(c["code"] for branch in ratings["ratings"].values() for c in branch)
    enum = sorted(schemas["ReviewInput"]["properties"]["rating"].get("enum", []))
    if enum and codes != enum:
        failures.append(f"rating codes {codes} differ from ReviewInput enum {enum}")

    for f in failures:
        print("FAIL", f)
    print(f"{len(schemas)} schemas, {len(cases)} instances checked")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(pathlib.Path(sys.argv[1])))
