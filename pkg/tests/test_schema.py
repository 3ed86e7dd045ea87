"""Attribute-name tables: parsing, lookup totality, schema selection."""

import pytest

from ifcgraph import schema
from ifcgraph.errors import MalformedTable, UnknownSchema


def test_bundled_ifc4_table():
    t = schema.load_schema("IFC4")
    assert t.schema_id == "IFC4"
    assert t.attribute_names("IFCAPPLICATION") == (
        "ApplicationDeveloper", "Version", "ApplicationFullName",
        "ApplicationIdentifier",
    )
    assert t.attribute_names("ifcapplication") == t.attribute_names("IFCAPPLICATION")
    assert t.canonical_name("IFCDOOR") == "IfcDoor"
    assert t.canonical_name("IFCLENGTHMEASURE") == "IfcLengthMeasure"
    assert t.canonical_name("IFCLABEL") == "IfcLabel"


def test_bundled_ifc2x3_table():
    t = schema.load_schema("IFC2X3")
    assert t.schema_id == "IFC2X3"
    assert t.canonical_name("IFCSIUNIT") == "IfcSIUnit"
    assert t.attribute_names("IFCSIUNIT") == (
        "Dimensions", "UnitType", "Prefix", "Name",
    )


def test_unknown_schema_raises():
    with pytest.raises(UnknownSchema):
        schema.load_schema("IFC9X9")


def test_attribute_name_is_total():
    t = schema.load_schema("IFC4")
    assert schema.attribute_name(t, "IFCDOOR", 2) == "Name"
    assert schema.attribute_name(t, "IFCDOOR", 99) == "arg99"
    assert schema.attribute_name(t, "IFCNOSUCHTYPE", 0) == "arg0"
    with pytest.raises(ValueError):
        schema.attribute_name(t, "IFCDOOR", -1)


def test_unknown_type_casing_falls_back_to_title():
    t = schema.load_schema("IFC4")
    assert not t.has_type("IFCNOSUCHTYPE")
    assert t.canonical_name("IFCNOSUCHTYPE") == "Ifcnosuchtype"


def test_parse_table_comments_and_name_only_lines():
    t = schema.parse_table(
        "X",
        "# comment\n\nIfcThing A B C\nIfcMeasure\n",
    )
    assert t.attribute_names("IFCTHING") == ("A", "B", "C")
    assert t.attribute_names("IFCMEASURE") is None
    assert t.canonical_name("IFCMEASURE") == "IfcMeasure"


def test_parse_table_rejects_duplicates():
    with pytest.raises(MalformedTable) as e1:
        schema.parse_table("X", "IfcA X\nIFCA Y\n")
    assert "2" in str(e1.value)
    with pytest.raises(MalformedTable):
        schema.parse_table("X", "IfcA Name Name\n")


@pytest.mark.parametrize(
    "declared,override,expected",
    [
        (("IFC4",), None, "IFC4"),
        (("IFC2X3",), None, "IFC2X3"),
        (("IFC2X3_TC1",), None, "IFC2X3"),
        (("IFC4X3_ADD2",), None, "IFC4"),
        ((), None, "IFC4"),
        (("SOMETHING_ELSE",), None, "IFC4"),
        (("IFC4",), "ifc2x3", "IFC2X3"),
    ],
)
def test_pick_schema_id(declared, override, expected):
    assert schema.pick_schema_id(declared, override) == expected
