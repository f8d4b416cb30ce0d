"""🚨 Error handling guide prompt."""


def get_error_handling_guide() -> str:
    """Each error type and the step that fixes it."""
    return """
🚨 Trajectory Engine Error Guide

**Input errors**
- IngestFormatError → the file is unreadable or its header differs from the expected one
  (points: object_id,t,x,y,device_id; devices: device_id,kind,reliability,description;
  activities: id,object_id,kind,label,t_begin,t_end,x,y; observations: id,event_id,feature,value,unit,t)
- Rejected rows → listed in the report's first_errors with their file line; the rest of the file still loads
- TrajectoryValidationError → timestamps of one object must strictly increase
- RegionForestError → duplicate region id, unknown parent, or a parent cycle (the message names the cycle)

**Reference errors**
- UnknownEntityError → the event, activity, region or object id does not exist
- ObjectMismatchError → an activity and an event (or a process's activities) belong to different objects
- DuplicateEntityError → a device id is already registered
- DanglingReferenceError → an event names a device that was never loaded; load the devices file
- EventTreeError → a child event is already parented, not time-nested in its parent, or would create a cycle

**Query errors**
- QueryParseError → reports line, column and what was expected at that position
- QuerySemanticError → unknown field for the source (valid fields are listed) or a literal of the wrong type;
  durations need a unit such as `600s`
- MissingPresentationError → run `segment --eps <m> --tau <s>` before stops/moves queries,
  and `annotate` before semantic or roi-visits queries

**Snapshot errors**
- SnapshotReadError → the file cannot be read
- SnapshotChecksumError → the file is truncated or corrupted
- SnapshotVersionError → not a snapshot, or written by an unsupported format version
"""
